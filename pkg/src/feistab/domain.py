"""Componentwise arithmetic on the unit cube and deterministic grid streams.

Three domains appear throughout the package:

* the closed cube [0,1]^k, carried by :class:`KVec`;
* the pair domain of the information equation, points (x, y) with every
  coordinate of x and y strictly below 1 and x + y <= 1 componentwise;
* componentwise probability tuples, n cube points summing to the all-ones
  vector.

Grids over these sets are built from exact integer lattice codes and emitted
in lexicographic code order, so regenerating a grid reproduces the identical
stream bitwise and arg-max reductions can break ties toward the smallest
code. Coordinates only ever pick up one rounding step relative to the exact
rationals i/m.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np

from .errors import DomainViolation, NonzeroOverZero

# Absolute slack for membership checks. Lattice construction and in-domain
# arithmetic stay within a couple of ulp, far below this.
TOL = 1e-12


class KVec:
    """A point of [0,1]^k with componentwise arithmetic.

    Coordinates are validated on construction; values overshooting the cube
    by at most ``TOL`` (one accumulated rounding step) are clamped onto the
    boundary, anything worse raises :class:`DomainViolation`. Instances are
    immutable and hashable, so they can key value tables directly. All
    operators act componentwise; division follows the 0/0 -> 0 convention
    of :func:`safe_div`.
    """

    __slots__ = ("coords",)

    def __init__(self, coords: Iterable[float]):
        cleaned = []
        for c in coords:
            c = float(c) + 0.0  # normalizes -0.0 so hashing and keys agree
            if not 0.0 <= c <= 1.0:
                if not (-TOL <= c <= 1.0 + TOL):
                    raise DomainViolation(f"coordinate {c!r} outside [0, 1]")
                c = 0.0 if c < 0.0 else 1.0
            cleaned.append(c)
        if not cleaned:
            raise DomainViolation("a vector needs at least one coordinate")
        self.coords = tuple(cleaned)

    @classmethod
    def one(cls, k: int) -> "KVec":
        return cls((1.0,) * k)

    @classmethod
    def zero(cls, k: int) -> "KVec":
        return cls((0.0,) * k)

    def _paired(self, other: "KVec"):
        if not isinstance(other, KVec):
            raise TypeError(f"expected KVec, got {type(other).__name__}")
        if len(other.coords) != len(self.coords):
            raise DomainViolation("dimension mismatch")
        return zip(self.coords, other.coords)

    def __add__(self, other: "KVec") -> "KVec":
        return KVec(a + b for a, b in self._paired(other))

    def __sub__(self, other: "KVec") -> "KVec":
        return KVec(a - b for a, b in self._paired(other))

    def __rsub__(self, scalar) -> "KVec":
        # enables the ubiquitous 1 - x
        return KVec(float(scalar) - a for a in self.coords)

    def __mul__(self, other) -> "KVec":
        if isinstance(other, KVec):
            return KVec(a * b for a, b in self._paired(other))
        return KVec(a * float(other) for a in self.coords)

    __rmul__ = __mul__

    def __truediv__(self, other: "KVec") -> "KVec":
        return safe_div(self, other)

    def __len__(self) -> int:
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, i: int) -> float:
        return self.coords[i]

    def __eq__(self, other) -> bool:
        return isinstance(other, KVec) and self.coords == other.coords

    def __hash__(self) -> int:
        return hash(self.coords)

    def __repr__(self) -> str:
        return "KVec(%s)" % ", ".join(repr(c) for c in self.coords)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coords, dtype=np.float64)


def safe_div(y: KVec, z: KVec) -> KVec:
    """Componentwise y/z with the convention that 0 over 0 is 0.

    Each coordinate needs z[j] > 0, or y[j] = z[j] = 0; a nonzero numerator
    over a zero denominator raises :class:`NonzeroOverZero`, marking the
    point as outside the legal domain. The quotient is validated as a cube
    point like any other vector.
    """
    out = []
    for a, b in y._paired(z):
        if b == 0.0:
            if a != 0.0:
                raise NonzeroOverZero(f"{a!r} / 0 has no conventional value")
            out.append(0.0)
        else:
            out.append(a / b)
    return KVec(out)


@dataclass(frozen=True)
class DkPair:
    """A legal argument pair (x, y) of the information equation."""

    x: KVec
    y: KVec

    def __post_init__(self):
        if len(self.x) != len(self.y):
            raise DomainViolation("pair members must share a dimension")
        for side in (self.x, self.y):
            if any(c >= 1.0 for c in side):
                raise DomainViolation("pair coordinates must stay below 1")
        for a, b in zip(self.x, self.y):
            if a + b > 1.0 + TOL:
                raise DomainViolation(f"x + y exceeds 1 ({a!r} + {b!r})")

    @property
    def k(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class SimplexTuple:
    """n componentwise-probability parts summing to the all-ones vector."""

    parts: tuple[KVec, ...]

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if len(self.parts) < 2:
            raise DomainViolation("need at least two parts")
        k = len(self.parts[0])
        if any(len(p) != k for p in self.parts):
            raise DomainViolation("parts must share a dimension")
        for j in range(k):
            total = math.fsum(p[j] for p in self.parts)
            if abs(total - 1.0) > TOL:
                raise DomainViolation(
                    f"coordinate {j} sums to {total!r}, expected 1"
                )

    @property
    def n(self) -> int:
        return len(self.parts)

    @property
    def k(self) -> int:
        return len(self.parts[0])


def _cube_codes(k: int, values: np.ndarray) -> np.ndarray:
    """All k-tuples over ``values`` as an (len**k, k) array, lex order."""
    grids = np.meshgrid(*([values] * k), indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=-1)


class CubeGrid:
    """Lattice points code/m over [0,1]^k in lexicographic code order.

    ``lo``/``hi`` bound the integer codes; the defaults cover the closed
    cube including both boundaries.
    """

    def __init__(self, k: int, m: int, lo: int = 0, hi: int | None = None):
        if k < 1 or m < 1:
            raise ValueError("need k >= 1 and m >= 1")
        self.k = k
        self.m = m
        self._lo = lo
        self._hi = m if hi is None else hi
        codes = np.arange(self._lo, self._hi + 1, dtype=np.int64)
        self.codes = _cube_codes(k, codes)
        self.points = self.codes.astype(np.float64) / float(m)

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self) -> Iterator[KVec]:
        for row in self.points:
            yield KVec(row)


def cube_grid(k: int, m: int) -> CubeGrid:
    """The closed-cube lattice {0, 1/m, ..., 1}^k, boundaries included."""
    return CubeGrid(k, m)


def interior_grid(k: int, m: int) -> CubeGrid:
    """The open-cube lattice {1/m, ..., (m-1)/m}^k used for witness scans."""
    if m < 2:
        raise ValueError("interior lattice needs m >= 2")
    return CubeGrid(k, m, lo=1, hi=m - 1)


class DkGrid:
    """All pair-domain lattice points at resolution m, in lex code order.

    Iteration yields :class:`DkPair`; ``xs``/``ys`` expose the same stream
    as (N, k) coordinate arrays for vectorized scans (built lazily, since
    the pair count grows like m**(2k)). Pair codes are the concatenation
    (x codes, y codes), so stream order is x-major.
    """

    def __init__(self, k: int, m: int):
        if k < 1 or m < 2:
            raise ValueError("need k >= 1 and m >= 2")
        self.k = k
        self.m = m
        self._arrays: tuple[np.ndarray, np.ndarray] | None = None

    def __len__(self) -> int:
        # per coordinate: pairs (i, j) with i, j < m and i + j <= m
        one_dim = self.m + self.m * (self.m + 1) // 2 - 1
        return one_dim**self.k

    def _iter_codes(self):
        m = self.m
        for xc in itertools.product(range(m), repeat=self.k):
            ranges = [range(min(m - i + 1, m)) for i in xc]
            for yc in itertools.product(*ranges):
                yield xc, yc

    def __iter__(self) -> Iterator[DkPair]:
        m = float(self.m)
        for xc, yc in self._iter_codes():
            yield DkPair(KVec(i / m for i in xc), KVec(j / m for j in yc))

    def _build_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        x_codes = _cube_codes(self.k, np.arange(self.m, dtype=np.int64))
        y_codes = x_codes
        xs_parts = []
        ys_parts = []
        # chunk over x rows to keep the candidate mask small
        step = max(1, 4_000_000 // max(len(y_codes), 1))
        for start in range(0, len(x_codes), step):
            xc = x_codes[start : start + step]
            ok = (xc[:, None, :] + y_codes[None, :, :] <= self.m).all(axis=2)
            xi, yi = np.nonzero(ok)
            xs_parts.append(xc[xi])
            ys_parts.append(y_codes[yi])
        xs = np.concatenate(xs_parts).astype(np.float64) / float(self.m)
        ys = np.concatenate(ys_parts).astype(np.float64) / float(self.m)
        return np.ascontiguousarray(xs), np.ascontiguousarray(ys)

    @property
    def xs(self) -> np.ndarray:
        if self._arrays is None:
            self._arrays = self._build_arrays()
        return self._arrays[0]

    @property
    def ys(self) -> np.ndarray:
        if self._arrays is None:
            self._arrays = self._build_arrays()
        return self._arrays[1]


def dk_grid(k: int, m: int) -> DkGrid:
    """Deterministic stream of all pair-domain lattice points.

    Coordinates range over {0, 1/m, ..., (m-1)/m}; the value 1 is excluded
    on both sides so the equation's denominators 1-x, 1-y never vanish.
    """
    return DkGrid(k, m)


def compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    """Nonnegative integer tuples of given length summing to total, ascending lex."""
    if parts < 1:
        raise ValueError("need at least one part")
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for rest in compositions(total - head, parts - 1):
            yield (head,) + rest


class SimplexGrid:
    """Product-of-compositions lattice over the n-part simplex.

    Per coordinate j, the j-th components of the n parts run over all
    compositions of m into n parts divided by m; the full grid is the
    product over coordinates, ordered lexicographically by the concatenated
    composition codes. Cardinality is C(m+n-1, n-1) ** k.
    """

    def __init__(self, n: int, k: int, m: int):
        if n < 2 or k < 1 or m < 1:
            raise ValueError("need n >= 2, k >= 1, m >= 1")
        self.n = n
        self.k = k
        self.m = m

    def __len__(self) -> int:
        return math.comb(self.m + self.n - 1, self.n - 1) ** self.k

    def __iter__(self) -> Iterator[SimplexTuple]:
        comps = list(compositions(self.m, self.n))
        m = float(self.m)
        for combo in itertools.product(comps, repeat=self.k):
            parts = tuple(
                KVec(combo[j][i] / m for j in range(self.k)) for i in range(self.n)
            )
            yield SimplexTuple(parts)


def simplex_grid(n: int, k: int, m: int) -> SimplexGrid:
    """Deterministic stream of all simplex lattice tuples."""
    return SimplexGrid(n, k, m)


def pair_arrays(grid) -> tuple[np.ndarray, np.ndarray]:
    """Coordinate arrays (X, Y) for a pair stream, preserving its order."""
    if isinstance(grid, DkGrid):
        return grid.xs, grid.ys
    pairs = list(grid)
    if not pairs:
        raise ValueError("empty pair grid")
    xs = np.asarray([p.x.coords for p in pairs], dtype=np.float64)
    ys = np.asarray([p.y.coords for p in pairs], dtype=np.float64)
    return xs, ys


def point_array(points) -> np.ndarray:
    """Coordinate array for a stream of cube points, preserving order."""
    if isinstance(points, CubeGrid):
        return points.points
    rows = [p.coords if isinstance(p, KVec) else tuple(p) for p in points]
    if not rows:
        raise ValueError("empty point set")
    return np.asarray(rows, dtype=np.float64)
