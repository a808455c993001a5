"""Multiplicative functions on the unit cube: atoms, products, witnesses.

A representable multiplicative function factors into per-coordinate atoms,

    M(x) = m_1(x_1) * ... * m_k(x_k),

where each atom is a power t**alpha (alpha > 0), the constant one, or the
constant zero. Every atom satisfies m(s t) = m(s) m(t) on [0,1], so M is
multiplicative and nonnegative by construction; powers take the value 0 at
t = 0 (continuity from the right), which keeps M(0) in {0, 1} and makes the
constructive fit downstream exact on closed-form inputs.

The additivity defect M(q) + M(1-q) - 1 separates additive from
non-additive specs: for nonzero multiplicative M it vanishes identically
exactly when M is additive on the pair domain. An interior point where it
is far from zero is the witness the stability bounds divide by.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import _kernels
from .domain import KVec, interior_grid, pair_arrays
from .errors import DomainViolation, NoWitness

DEFAULT_TAU = 1e-6

_KIND_CODES = {"power": _kernels.ATOM_POWER, "one": _kernels.ATOM_ONE, "zero": _kernels.ATOM_ZERO}


@dataclass(frozen=True)
class Atom:
    """One coordinate factor: ``power`` (with alpha > 0), ``one`` or ``zero``."""

    kind: str
    alpha: float | None = None

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise DomainViolation(f"unknown atom kind {self.kind!r}")
        if self.kind == "power":
            if self.alpha is None or not self.alpha > 0:
                raise DomainViolation("power atoms need alpha > 0")
            object.__setattr__(self, "alpha", float(self.alpha))
        elif self.alpha is not None:
            raise DomainViolation(f"{self.kind} atoms take no exponent")

    def value(self, t: float) -> float:
        if self.kind == "power":
            return t**self.alpha  # 0**alpha = 0 for alpha > 0
        return 1.0 if self.kind == "one" else 0.0

    def to_json(self) -> dict:
        if self.kind == "power":
            return {"kind": "power", "alpha": self.alpha}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "Atom":
        if not isinstance(obj, dict) or "kind" not in obj:
            raise DomainViolation(f"bad atom spec {obj!r}")
        return cls(obj["kind"], obj.get("alpha"))


def power(alpha: float) -> Atom:
    return Atom("power", alpha)


ONE = Atom("one")
ZERO = Atom("zero")


@dataclass(frozen=True)
class MultiplicativeSpec:
    """A product of per-coordinate atoms, callable on cube points."""

    atoms: tuple[Atom, ...]

    def __post_init__(self):
        object.__setattr__(self, "atoms", tuple(self.atoms))
        if not self.atoms:
            raise DomainViolation("need at least one atom")

    @property
    def k(self) -> int:
        return len(self.atoms)

    @cached_property
    def _kind_codes(self) -> np.ndarray:
        return np.asarray([_KIND_CODES[a.kind] for a in self.atoms], dtype=np.int8)

    @cached_property
    def _alphas(self) -> np.ndarray:
        return np.asarray(
            [a.alpha if a.kind == "power" else 1.0 for a in self.atoms],
            dtype=np.float64,
        )

    def __call__(self, x: KVec) -> float:
        if len(x) != self.k:
            raise DomainViolation("dimension mismatch")
        acc = 1.0
        for atom, t in zip(self.atoms, x):
            acc *= atom.value(t)
        return acc

    def many(self, pts: np.ndarray) -> np.ndarray:
        """Vectorized evaluation over an (n, k) coordinate array."""
        pts = np.ascontiguousarray(pts, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != self.k:
            raise DomainViolation(f"expected (n, {self.k}) points")
        return _kernels.mult_eval(self._kind_codes, self._alphas, pts)

    def to_json(self) -> list:
        return [a.to_json() for a in self.atoms]

    @classmethod
    def from_json(cls, obj) -> "MultiplicativeSpec":
        if not isinstance(obj, (list, tuple)):
            raise DomainViolation("atom list expected")
        return cls(tuple(Atom.from_json(a) for a in obj))


def powers(*alphas: float) -> MultiplicativeSpec:
    """Shorthand for a spec of power atoms, one per coordinate."""
    return MultiplicativeSpec(tuple(power(a) for a in alphas))


class Family(enum.Enum):
    ZERO_FN = "zero"
    CONST_ONE = "const-one"
    PROJECTION = "projection"
    NON_ADDITIVE = "non-additive"


@dataclass(frozen=True)
class Classification:
    family: Family
    axis: int | None = None  # coordinate picked out by a projection


def classify(M: MultiplicativeSpec) -> Classification:
    """Structural classification of a spec.

    Zero and projection specs are the additive multiplicative functions;
    the constant one gets its own label (it is neither additive nor useful
    as a stability witness source, see :func:`find_witness`). Everything
    else is reported non-additive, which a witness scan then confirms.
    """
    kinds = [a.kind for a in M.atoms]
    if "zero" in kinds:
        return Classification(Family.ZERO_FN)
    if all(kind == "one" for kind in kinds):
        return Classification(Family.CONST_ONE)
    unit_axes = [
        i for i, a in enumerate(M.atoms) if a.kind == "power" and a.alpha == 1.0
    ]
    rest_are_one = all(
        a.kind == "one" for i, a in enumerate(M.atoms) if i not in unit_axes
    )
    if len(unit_axes) == 1 and rest_are_one:
        return Classification(Family.PROJECTION, axis=unit_axes[0])
    return Classification(Family.NON_ADDITIVE)


def additivity_defect(M: MultiplicativeSpec, q: KVec) -> float:
    """M(q) + M(1-q) - 1, the pointwise additivity defect."""
    return M(q) + M(1 - q) - 1.0


def dk_additivity_defect(M: MultiplicativeSpec, grid) -> float:
    """Largest |M(x+y) - M(x) - M(y)| over a pair grid."""
    xs, ys = pair_arrays(grid)
    vals = np.abs(M.many(xs + ys) - M.many(xs) - M.many(ys))
    return float(vals.max())


def find_witness(M: MultiplicativeSpec, m: int, tau: float = DEFAULT_TAU) -> KVec:
    """Interior lattice point maximizing the absolute additivity defect.

    Scans q in {1/m, ..., (m-1)/m}^k and returns the maximizer provided the
    best |defect| reaches ``tau``; ties break toward the smallest lattice
    code so parallel and serial scans agree. Structurally degenerate specs
    are refused up front: projections have defect identically zero, while
    the zero function is additive even though its pointwise defect is -1
    and the constant one is excluded alongside it, so a raw scan would hand
    back a point that certifies nothing.
    """
    if m < 2:
        raise ValueError("witness scan needs m >= 2")
    if not tau > 0:
        raise ValueError("tau must be positive")
    label = classify(M)
    if label.family is not Family.NON_ADDITIVE:
        raise NoWitness(f"{label.family.value} spec admits no usable witness")
    pts = interior_grid(M.k, m).points
    defects = M.many(pts) + M.many(1.0 - pts) - 1.0
    i = int(np.argmax(np.abs(defects)))
    if abs(defects[i]) < tau:
        raise NoWitness(
            f"best defect {defects[i]:.3e} on the m={m} grid is below tau={tau:.1e}"
        )
    return KVec(pts[i])


def upper_bound(M: MultiplicativeSpec) -> float:
    """Least constant bounding M from above on the cube.

    Every supported atom maps [0,1] into [0,1], so the bound is 1 unless a
    zero atom collapses the product.
    """
    return 0.0 if any(a.kind == "zero" for a in M.atoms) else 1.0
