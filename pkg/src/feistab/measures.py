"""Information measures on probability tuples and the system certificate.

A measure family assigns a real number to every n-part tuple (n >= 2). Two
structural properties matter here:

* recursivity with weight M: I_n(p_1, ..., p_n) equals
  I_{n-1}(p_1+p_2, p_3, ..., p_n) + M(p_1+p_2) I_2(p_1/(p_1+p_2), p_2/(p_1+p_2)),
  with 0/(0+0) read as 0;
* 3-semisymmetry: I_3 is invariant under swapping its last two parts.

The closed-form solutions of that system are

    J_n(p_1, ..., p_n) = c (sum_i M(p_i) - 1) + d (M(p_1) - 1),

which is recursive and semisymmetric exactly (the d contributions
telescope through the merge). For a family that satisfies both properties
only up to measured deficiencies, the bridge function f(x) = I_2(1-x, x)
nearly solves the information equation, the fit (a, b) of
:mod:`feistab.feim` transfers to (c, d) = (a, b-a), and every level obeys

    |I_n - J_n| <= sum_{k=2}^{n-1} eps_k + (1 + (n-2) M(p_1+p_2)) K(p_2),

with K instantiated at eps = eps_1 + 2 eps_2 (the bound the bridge
function's residual actually satisfies). :func:`certify_system` measures
the deficiencies and checks that inequality on simplex grids.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

from .domain import KVec, SimplexTuple, safe_div, simplex_grid
from .errors import DegenerateWitness, DomainViolation, NoWitness
from .feim import SLACK, Fcn, K_bound, Tabulated, construct_ab
from .multiplicative import (
    DEFAULT_TAU,
    Family,
    MultiplicativeSpec,
    additivity_defect,
    classify,
    find_witness,
)


@dataclass(frozen=True)
class JFamily:
    """Closed-form family c (sum_i M(p_i) - 1) + d (M(p_1) - 1)."""

    c: float
    d: float
    M: MultiplicativeSpec

    def value(self, t: SimplexTuple) -> float:
        total = sum(self.M(p) for p in t.parts)
        return self.c * (total - 1.0) + self.d * (self.M(t.parts[0]) - 1.0)

    def value2(self, q1: KVec, q2: KVec) -> float:
        return self.c * (self.M(q1) + self.M(q2) - 1.0) + self.d * (self.M(q1) - 1.0)

    def base_fcn(self):
        """The level-2 member as a cube function of the second part."""
        from .feim import Exact

        return Exact(self.c, self.c + self.d, self.M)


class MeasureFamily:
    """A sequence of functions on n-part tuples, n >= 2.

    ``eval2`` evaluates the level-2 member on an arbitrary pair of cube
    points. That signature matters: the recursion's conditional pair
    (p_1/s, p_2/s) with s = p_1 + p_2 falls outside the two-part simplex
    whenever a coordinate of s is 0, so level-2 evaluation cannot insist on
    simplex membership.
    """

    M: MultiplicativeSpec

    def eval(self, t: SimplexTuple) -> float:
        if t.n == 2:
            return self.eval2(t.parts[0], t.parts[1])
        return self._eval_higher(t)

    def eval2(self, q1: KVec, q2: KVec) -> float:
        raise NotImplementedError

    def _eval_higher(self, t: SimplexTuple) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ExactJ(MeasureFamily):
    """The closed-form family, evaluated directly at every level."""

    J: JFamily

    @property
    def M(self) -> MultiplicativeSpec:
        return self.J.M

    def eval2(self, q1: KVec, q2: KVec) -> float:
        return self.J.value2(q1, q2)

    def _eval_higher(self, t: SimplexTuple) -> float:
        return self.J.value(t)


@dataclass(frozen=True)
class Recursive(MeasureFamily):
    """A family unfolded from its level-2 base by the recursion itself.

    ``base`` is a cube function giving I_2(q1, q2) = base(q2); on the
    two-part simplex the first part is determined by the second, and at the
    convention point (0, 0) the value is irrelevant because the recursion
    multiplies it by M of a vector with a zero coordinate in every atom
    that could see the difference.
    """

    base: Fcn
    M: MultiplicativeSpec

    def eval2(self, q1: KVec, q2: KVec) -> float:
        return self.base(q2)

    def _eval_higher(self, t: SimplexTuple) -> float:
        # merge the first two parts, exactly as the recursion displays
        s = t.parts[0] + t.parts[1]
        v = safe_div(t.parts[1], s)
        merged = SimplexTuple((s,) + t.parts[2:])
        return self.eval(merged) + self.M(s) * self.base(v)


@dataclass(frozen=True)
class PerturbedLevels(MeasureFamily):
    """A base family plus independent bounded noise per level.

    ``noise`` maps a level n to a noise spec; levels without an entry stay
    exact. Noise is keyed by the flattened part coordinates, so the same
    tuple always picks up the same perturbation, independent of how the
    evaluation was scheduled.
    """

    base: MeasureFamily
    noise: Mapping[int, object] = field(default_factory=dict)

    @property
    def M(self) -> MultiplicativeSpec:
        return self.base.M

    def _eta(self, level: int, coords) -> float:
        spec = self.noise.get(level)
        if spec is None:
            return 0.0
        return spec.eta_key(coords)

    def eval2(self, q1: KVec, q2: KVec) -> float:
        # level-2 noise is keyed by the second part alone: on the two-part
        # simplex the first part is redundant, and the recursion's
        # conditional pair must hit the same draw as the bridge function
        # evaluated at the matching point
        return self.base.eval2(q1, q2) + self._eta(2, q2.coords)

    def _eval_higher(self, t: SimplexTuple) -> float:
        flat = tuple(c for p in t.parts for c in p.coords)
        return self.base.eval(t) + self._eta(t.n, flat)


def measure_eval(family: MeasureFamily, t: SimplexTuple) -> float:
    """Evaluate a family at one tuple."""
    return family.eval(t)


def recursivity_defect(family: MeasureFamily, n: int, grid) -> float:
    """Measured sup of the level-n recursion violation over a tuple grid.

    This is the deficiency eps_{n-1}: the largest
    |I_n - I_{n-1}(merged) - M(p_1+p_2) I_2(conditional pair)| seen.
    """
    if n < 3:
        raise ValueError("recursivity is a constraint between levels n >= 3 and below")
    M = family.M
    worst = 0.0
    for t in grid:
        if t.n != n:
            raise DomainViolation(f"expected {n}-part tuples, got {t.n}")
        s = t.parts[0] + t.parts[1]
        u = safe_div(t.parts[0], s)
        v = safe_div(t.parts[1], s)
        merged = SimplexTuple((s,) + t.parts[2:])
        gap = family.eval(t) - family.eval(merged) - M(s) * family.eval2(u, v)
        worst = max(worst, abs(gap))
    return worst


def semisymmetry_defect(family: MeasureFamily, grid) -> float:
    """Measured sup of |I_3(p1, p2, p3) - I_3(p1, p3, p2)| (deficiency eps_1)."""
    worst = 0.0
    for t in grid:
        if t.n != 3:
            raise DomainViolation("semisymmetry is a three-part property")
        swapped = SimplexTuple((t.parts[0], t.parts[2], t.parts[1]))
        worst = max(worst, abs(family.eval(t) - family.eval(swapped)))
    return worst


def derive_f(family: MeasureFamily, points) -> Tabulated:
    """Tabulate the bridge function x -> I_2(1-x, x) at the given cube points."""
    table = {}
    for x in points:
        if not isinstance(x, KVec):
            x = KVec(x)
        table[x.coords] = family.eval2(1 - x, x)
    return Tabulated(table)


def system_bound(
    n: int,
    eps_seq,
    M: MultiplicativeSpec,
    qstar: KVec,
    t: SimplexTuple,
    tau: float = DEFAULT_TAU,
) -> float:
    """Right-hand side of the level-n system inequality at one tuple.

    sum_{k=2}^{n-1} eps_k + (1 + (n-2) M(p_1+p_2)) K(p_2), with the empty
    sum at n = 2 and K instantiated at eps = eps_1 + 2 eps_2. ``eps_seq``
    lists (eps_1, eps_2, ...) and must reach eps_2 even for n = 2.
    """
    eps_seq = tuple(float(e) for e in eps_seq)
    if len(eps_seq) < 2:
        raise ValueError("need eps_1 and eps_2 to instantiate K")
    if any(e < 0 for e in eps_seq):
        raise ValueError("deficiencies must be nonnegative")
    if t.n != n:
        raise DomainViolation(f"expected {n}-part tuple, got {t.n}")
    eps_k = eps_seq[0] + 2.0 * eps_seq[1]
    s = t.parts[0] + t.parts[1]
    tail = sum(eps_seq[1 : n - 1])
    return tail + (1.0 + (n - 2) * M(s)) * K_bound(M, qstar, eps_k, t.parts[1], tau)


@dataclass(frozen=True)
class SystemCertificate:
    """Outcome of the level-by-level system check."""

    c: float
    d: float
    qstar: KVec
    defect: float
    eps_seq: tuple[float, ...]  # (eps_1, eps_2, ...) as measured
    max_violation: dict[int, float]  # per level: max of |I_n - J_n| - bound
    points_checked: dict[int, int]
    verdict: str

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    @property
    def worst_violation(self) -> float:
        return max(self.max_violation.values())


def certify_system(
    family: MeasureFamily,
    M: MultiplicativeSpec,
    N: int,
    m: int,
    qstar: KVec | str = "auto",
    tau: float = DEFAULT_TAU,
    witness_resolution: int | None = None,
) -> SystemCertificate:
    """Measure deficiencies, transfer the fit to (c, d), check every level.

    Deficiencies are measured on simplex grids of resolution ``m``:
    eps_1 from 3-semisymmetry, eps_{n-1} from level-n recursivity for
    n = 3..max(N, 3) (eps_2 is always needed, it feeds K). The fit comes
    from the bridge function at the witness, c = a and d = b - a, and the
    certificate records the worst bound violation on each Gamma_n grid for
    n = 2..N. All claims are about the sampled grids only.
    """
    if N < 2:
        raise ValueError("need N >= 2")
    if classify(M).family is not Family.NON_ADDITIVE:
        raise NoWitness("system certification needs a non-additive M")
    k = M.k

    eps = [semisymmetry_defect(family, simplex_grid(3, k, m))]
    for level in range(3, max(N, 3) + 1):
        eps.append(recursivity_defect(family, level, simplex_grid(level, k, m)))

    if isinstance(qstar, str):
        if qstar != "auto":
            raise ValueError(f"unknown witness mode {qstar!r}")
        qstar = find_witness(M, witness_resolution or m, tau)
    defect = additivity_defect(M, qstar)
    if abs(defect) < tau:
        raise DegenerateWitness(f"defect {defect:.3e} at q* is below tau={tau:.1e}")

    one = KVec.one(k)
    f = derive_f(family, [one, qstar])
    a, b = construct_ab(f, M, qstar, tau)
    c, d = a, b - a
    J = JFamily(c, d, M)

    violations: dict[int, float] = {}
    counts: dict[int, int] = {}
    for n in range(2, N + 1):
        worst = -float("inf")
        count = 0
        for t in simplex_grid(n, k, m):
            dev = abs(family.eval(t) - J.value(t))
            bound = system_bound(n, eps, M, qstar, t, tau)
            worst = max(worst, dev - bound)
            count += 1
        violations[n] = worst
        counts[n] = count

    verdict = "pass" if all(v <= SLACK for v in violations.values()) else "fail"
    return SystemCertificate(
        c=c,
        d=d,
        qstar=qstar,
        defect=defect,
        eps_seq=tuple(eps),
        max_violation=violations,
        points_checked=counts,
        verdict=verdict,
    )
