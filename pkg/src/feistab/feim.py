"""Residuals, exact solutions and stability certificates for the equation

    f(x) + M(1-x) f(y/(1-x)) = f(y) + M(1-y) f(x/(1-y))

over the pair domain, with M multiplicative. The closed-form solution
family is

    f_{a,b}(x) = a M(x) + b (M(1-x) - 1),

and for non-additive M every function whose residual stays within eps of
zero lies within an explicit pointwise bound of some family member:

    |f(x) - f_{a,b}(x)| <= K(x) = (4 eps + 3 eps M(1 - x q*)) / |defect(q*)|

where q* is any interior point with defect(q*) = M(q*) + M(1-q*) - 1 away
from zero. The fit is constructive,

    b = (f(q*) - f(1) M(q*)) / defect(q*),    a = f(1) + b,

and :func:`certify` measures eps on a pair grid, builds (a, b) and checks
the bound at every requested cube point, boundary included.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import DkPair, KVec, pair_arrays, point_array, safe_div
from .errors import DegenerateWitness, EvaluationOutsideTable, NoWitness
from .multiplicative import (
    DEFAULT_TAU,
    Family,
    MultiplicativeSpec,
    additivity_defect,
    classify,
    find_witness,
    upper_bound,
)

# numerical slack on every inequality check: covers double-precision
# accumulation across the handful of evaluations behind each point
SLACK = 1e-9


class Fcn:
    """An evaluable real function on the unit cube.

    Subclasses provide scalar ``__call__`` on :class:`KVec` and may
    override ``many`` for vectorized evaluation over an (n, k) array.
    """

    def __call__(self, x: KVec) -> float:
        raise NotImplementedError

    def many(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray([self(KVec(row)) for row in np.asarray(pts)])


@dataclass(frozen=True)
class Exact(Fcn):
    """A member a M(x) + b (M(1-x) - 1) of the solution family."""

    a: float
    b: float
    M: MultiplicativeSpec

    def __call__(self, x: KVec) -> float:
        return self.a * self.M(x) + self.b * (self.M(1 - x) - 1.0)

    def many(self, pts: np.ndarray) -> np.ndarray:
        pts = np.asarray(pts, dtype=np.float64)
        return self.a * self.M.many(pts) + self.b * (self.M.many(1.0 - pts) - 1.0)


class Tabulated(Fcn):
    """Exact-key value table over declared cube points.

    Lookups off the declared keys raise instead of interpolating, so any
    supremum measured through a table is a claim about exactly the declared
    grid. Keys are coordinate tuples; points constructed by the same
    arithmetic path hit the same key bitwise.
    """

    def __init__(self, table):
        self._table: dict[tuple, float] = {}
        items = table.items() if isinstance(table, dict) else table
        for key, val in items:
            if isinstance(key, KVec):
                key = key.coords
            self._table[tuple(float(c) + 0.0 for c in key)] = float(val)

    def __len__(self) -> int:
        return len(self._table)

    def __call__(self, x: KVec) -> float:
        try:
            return self._table[x.coords]
        except KeyError:
            raise EvaluationOutsideTable(f"point {x!r} not tabulated") from None

    def many(self, pts: np.ndarray) -> np.ndarray:
        out = np.empty(len(pts))
        for i, row in enumerate(np.asarray(pts)):
            key = tuple(float(c) + 0.0 for c in row)
            try:
                out[i] = self._table[key]
            except KeyError:
                raise EvaluationOutsideTable(f"point {key!r} not tabulated") from None
        return out


@dataclass(frozen=True)
class Perturbed(Fcn):
    """base(x) + eta(x) for deterministic noise with |eta| <= amplitude.

    ``noise`` is any object exposing ``eta(KVec)``, ``eta_many(array)`` and
    an ``amplitude`` attribute (see :class:`feistab.harness.NoiseSpec`).
    """

    base: Fcn
    noise: object

    def __call__(self, x: KVec) -> float:
        return self.base(x) + self.noise.eta(x)

    def many(self, pts: np.ndarray) -> np.ndarray:
        return self.base.many(pts) + self.noise.eta_many(np.asarray(pts, dtype=np.float64))


def feim_residual(f: Fcn, M: MultiplicativeSpec, pair: DkPair) -> float:
    """The equation residual f(x) + M(1-x) f(y/(1-x)) - f(y) - M(1-y) f(x/(1-y))."""
    x, y = pair.x, pair.y
    one_x = 1 - x
    one_y = 1 - y
    q1 = safe_div(y, one_x)
    q2 = safe_div(x, one_y)
    return f(x) + M(one_x) * f(q1) - f(y) - M(one_y) * f(q2)


def _residual_values(f: Fcn, M: MultiplicativeSpec, xs, ys) -> np.ndarray:
    one_x = 1.0 - xs
    one_y = 1.0 - ys
    q1 = np.clip(ys / one_x, 0.0, 1.0)
    q2 = np.clip(xs / one_y, 0.0, 1.0)
    return f.many(xs) + M.many(one_x) * f.many(q1) - f.many(ys) - M.many(one_y) * f.many(q2)


class ResidualSup(NamedTuple):
    sup: float
    argmax: DkPair


def sup_residual(f: Fcn, M: MultiplicativeSpec, grid) -> ResidualSup:
    """Largest |residual| over a pair grid, with its deterministic arg-max.

    The arg-max is the first maximizer in stream order, i.e. the pair with
    the smallest lattice code, so partitioned scans reduce identically.
    """
    xs, ys = pair_arrays(grid)
    vals = np.abs(_residual_values(f, M, xs, ys))
    i = int(np.argmax(vals))
    return ResidualSup(float(vals[i]), DkPair(KVec(xs[i]), KVec(ys[i])))


def residual_support(grid) -> list[KVec]:
    """Every cube point a residual scan over ``grid`` evaluates f at.

    Useful for building a table that supports exactly one scan: the pair
    members plus both conditional quotients, deduplicated in stream order.
    """
    xs, ys = pair_arrays(grid)
    one_x = 1.0 - xs
    one_y = 1.0 - ys
    q1 = np.clip(ys / one_x, 0.0, 1.0)
    q2 = np.clip(xs / one_y, 0.0, 1.0)
    seen: dict[tuple, None] = {}
    for block in (xs, ys, q1, q2):
        for row in block:
            seen.setdefault(tuple(float(c) + 0.0 for c in row), None)
    return [KVec(key) for key in seen]


def F_eval(f: Fcn, M: MultiplicativeSpec, p: KVec, q: KVec) -> float:
    """f(1-p) + M(p) f(q) - f(pq) - M(1-pq) f((1-p)/(1-pq)).

    Substituting x = 1-p, y = pq turns this into the plain residual, so
    its magnitude inherits any residual bound. Defined for p interior
    (each coordinate in (0,1)) and q anywhere in the closed cube.
    """
    pq = p * q
    one_pq = 1 - pq
    return (
        f(1 - p)
        + M(p) * f(q)
        - f(pq)
        - M(one_pq) * f(safe_div(1 - p, one_pq))
    )


def sup_F(f: Fcn, M: MultiplicativeSpec, grid) -> float:
    """Largest |F(p, q)| over the open-cube pairs matching a pair grid.

    Each grid pair (x, y) with x, y interior and x + y < 1 corresponds to
    (p, q) = (1-x, y/(1-x)); F there re-evaluates that pair's residual, so
    this supremum is the F-side view of the same measurement.
    """
    xs, ys = pair_arrays(grid)
    keep = (xs > 0.0).all(axis=1) & (ys > 0.0).all(axis=1) & (xs + ys < 1.0).all(axis=1)
    if not keep.any():
        raise ValueError("grid has no interior pairs")
    p = 1.0 - xs[keep]
    q = np.clip(ys[keep] / (1.0 - xs[keep]), 0.0, 1.0)
    pq = p * q
    one_pq = 1.0 - pq
    w = np.clip((1.0 - p) / one_pq, 0.0, 1.0)
    vals = f.many(1.0 - p) + M.many(p) * f.many(q) - f.many(pq) - M.many(one_pq) * f.many(w)
    return float(np.abs(vals).max())


def construct_ab(
    f: Fcn, M: MultiplicativeSpec, qstar: KVec, tau: float = DEFAULT_TAU
) -> tuple[float, float]:
    """The constructive fit (a, b) anchored at a witness point.

    b = (f(q*) - f(1) M(q*)) / (M(q*) + M(1-q*) - 1)  and  a = f(1) + b.

    On a family member with M(0) in {0, 1} this recovers the generating
    parameters exactly up to roundoff.
    """
    d = additivity_defect(M, qstar)
    if abs(d) < tau:
        raise DegenerateWitness(f"defect {d:.3e} at q* is below tau={tau:.1e}")
    one = KVec.one(M.k)
    f_one = f(one)
    b = (f(qstar) - f_one * M(qstar)) / d
    return f_one + b, b


def K_bound(
    M: MultiplicativeSpec, qstar: KVec, eps: float, x: KVec, tau: float = DEFAULT_TAU
) -> float:
    """(4 eps + 3 eps M(1 - x q*)) / |M(q*) + M(1-q*) - 1| at one point."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    d = additivity_defect(M, qstar)
    if abs(d) < tau:
        raise DegenerateWitness(f"defect {d:.3e} at q* is below tau={tau:.1e}")
    return (4.0 * eps + 3.0 * eps * M(1 - x * qstar)) / abs(d)


def uniform_bound(
    M: MultiplicativeSpec, qstar: KVec, eps: float, tau: float = DEFAULT_TAU
) -> float:
    """(4 + 3B) eps / |defect(q*)| with B the cube-wide bound on M.

    Dominates :func:`K_bound` at every x, which is what makes the bound
    uniform (superstability) for bounded M.
    """
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    d = additivity_defect(M, qstar)
    if abs(d) < tau:
        raise DegenerateWitness(f"defect {d:.3e} at q* is below tau={tau:.1e}")
    return (4.0 + 3.0 * upper_bound(M)) * eps / abs(d)


@dataclass(frozen=True)
class StabilityCertificate:
    """Outcome of one pointwise bound check over a cube grid."""

    qstar: KVec
    defect: float
    eps_measured: float
    a: float
    b: float
    sup_deviation: float
    max_violation: float  # max over the grid of |f - fit| - K
    verdict: str  # "pass" | "fail"
    points_checked: int

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"


def certify(
    f: Fcn,
    M: MultiplicativeSpec,
    dgrid,
    cube,
    qstar: KVec | str = "auto",
    tau: float = DEFAULT_TAU,
    witness_resolution: int | None = None,
) -> StabilityCertificate:
    """Measure eps, fit (a, b) from a witness and check the pointwise bound.

    eps is the measured residual supremum over ``dgrid``; the certificate
    claims |f(x) - f_{a,b}(x)| <= K(x) + SLACK at every point of ``cube``
    (boundary points included deliberately: the guarantee extends to the
    closed cube). Raises :class:`NoWitness` when M is not structurally
    non-additive, since then there is nothing to anchor the bound to.
    """
    if classify(M).family is not Family.NON_ADDITIVE:
        raise NoWitness("certification needs a multiplicative but non-additive M")
    xs, ys = pair_arrays(dgrid)
    vals = np.abs(_residual_values(f, M, xs, ys))
    eps = float(vals.max())

    if isinstance(qstar, str):
        if qstar != "auto":
            raise ValueError(f"unknown witness mode {qstar!r}")
        resolution = witness_resolution or getattr(dgrid, "m", None) or 16
        qstar = find_witness(M, resolution, tau)
    defect = additivity_defect(M, qstar)
    if abs(defect) < tau:
        raise DegenerateWitness(f"defect {defect:.3e} at q* is below tau={tau:.1e}")

    a, b = construct_ab(f, M, qstar, tau)
    pts = point_array(cube)
    dev = np.abs(f.many(pts) - (a * M.many(pts) + b * (M.many(1.0 - pts) - 1.0)))
    qrow = qstar.as_array()
    k_vals = (4.0 * eps + 3.0 * eps * M.many(1.0 - pts * qrow)) / abs(defect)
    violation = float((dev - k_vals).max())
    return StabilityCertificate(
        qstar=qstar,
        defect=defect,
        eps_measured=eps,
        a=a,
        b=b,
        sup_deviation=float(dev.max()),
        max_violation=violation,
        verdict="pass" if violation <= SLACK else "fail",
        points_checked=int(len(pts)),
    )
