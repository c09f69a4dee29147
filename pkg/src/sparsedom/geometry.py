"""Dyadic grids, shifted grids, cube covering and Whitney decomposition.

The toolkit works on R^n (n = 1 or 2) with exact rational coordinates.
Besides the standard dyadic grid there is one shifted grid per axis
(offset one third of the sidelength), giving 2^n grids in total.  The
central geometric fact implemented here: every axis-parallel cube is
contained in a single cube of one of these grids with sidelength at most
6 times larger (``cover_cube``).

Shift convention.  At scale 2**-k the shifted tiling is offset by
(-1)**k * (1/3) * 2**-k.  The alternating sign is what makes the shifted
family an honest dyadic grid: each cube at scale k is the exact union of
two (2^n) cubes at scale k+1.  With a constant offset the tilings at
adjacent scales would not nest.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .rational import (
    THIRD,
    ZERO,
    Rat,
    floor_log2,
    pow2,
    rat,
    rat_ceil,
    rat_floor,
    rat_str,
)

ALPHA_CHOICES = (ZERO, THIRD)


def _shift_sign(k: int) -> int:
    return 1 if k % 2 == 0 else -1


@dataclass(frozen=True)
class GridId:
    """One of the 2^n dyadic grids: per-axis shift component 0 or 1/3."""

    alpha: tuple[Fraction, ...]

    def __post_init__(self):
        for a in self.alpha:
            if a not in ALPHA_CHOICES:
                raise ValueError(f"grid shift component must be 0 or 1/3, got {a}")

    @property
    def dim(self) -> int:
        return len(self.alpha)

    @property
    def is_standard(self) -> bool:
        return all(a == 0 for a in self.alpha)

    def offset_at(self, k: int) -> tuple[Fraction, ...]:
        """Signed per-axis shift (in units of the sidelength) at scale k."""
        s = _shift_sign(k)
        return tuple(s * a for a in self.alpha)

    @staticmethod
    def standard(dim: int) -> "GridId":
        return GridId((ZERO,) * dim)

    @staticmethod
    def shifted(dim: int) -> "GridId":
        return GridId((THIRD,) * dim)

    @staticmethod
    def all_grids(dim: int) -> list["GridId"]:
        return [GridId(c) for c in itertools.product(ALPHA_CHOICES, repeat=dim)]

    def to_json(self) -> list:
        return [0 if a == 0 else "1/3" for a in self.alpha]

    @staticmethod
    def from_json(data) -> "GridId":
        return GridId(tuple(rat(a) for a in data))


@dataclass(frozen=True)
class Box:
    """Half-open axis-parallel box: product of [lo_i, hi_i)."""

    lo: tuple[Fraction, ...]
    hi: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.lo) != len(self.hi):
            raise ValueError("box corner dimension mismatch")
        for a, b in zip(self.lo, self.hi):
            if b <= a:
                raise ValueError("box must have positive sides")

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def sides(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in zip(self.lo, self.hi))

    @property
    def is_cube(self) -> bool:
        s = self.sides
        return all(x == s[0] for x in s)

    @property
    def side(self) -> Fraction:
        if not self.is_cube:
            raise ValueError("box is not a cube")
        return self.hi[0] - self.lo[0]

    @property
    def measure(self) -> Fraction:
        m = Fraction(1)
        for s in self.sides:
            m *= s
        return m

    @property
    def center(self) -> tuple[Fraction, ...]:
        return tuple((a + b) / 2 for a, b in zip(self.lo, self.hi))

    def contains_point(self, x) -> bool:
        return all(a <= xi < b for a, xi, b in zip(self.lo, x, self.hi))

    def contains_box(self, other: "Box") -> bool:
        return all(a <= oa and ob <= b
                   for a, oa, ob, b in zip(self.lo, other.lo, other.hi, self.hi))

    def intersect(self, other: "Box"):
        lo = tuple(max(a, b) for a, b in zip(self.lo, other.lo))
        hi = tuple(min(a, b) for a, b in zip(self.hi, other.hi))
        if any(h <= l for l, h in zip(lo, hi)):
            return None
        return Box(lo, hi)

    def to_json(self) -> dict:
        return {"lo": [rat_str(a) for a in self.lo],
                "hi": [rat_str(b) for b in self.hi]}

    @staticmethod
    def from_json(data) -> "Box":
        return Box(tuple(rat(a) for a in data["lo"]),
                   tuple(rat(b) for b in data["hi"]))

    @staticmethod
    def interval(lo, hi) -> "Box":
        return Box((rat(lo),), (rat(hi),))

    @staticmethod
    def square(lo, hi) -> "Box":
        return Box((rat(lo), rat(lo)), (rat(hi), rat(hi)))


@dataclass(frozen=True)
class Cube:
    """Grid cube: scale k (sidelength 2**-k) and integer index per axis.

    The corner on axis i sits at (j_i + sign(k) * alpha_i) * 2**-k where
    sign(k) = (-1)**k (see module docstring).
    """

    grid: GridId
    k: int
    j: tuple[int, ...]

    def __post_init__(self):
        if len(self.j) != self.grid.dim:
            raise ValueError("cube index dimension mismatch")

    @property
    def dim(self) -> int:
        return self.grid.dim

    @property
    def side(self) -> Fraction:
        return pow2(-self.k)

    @property
    def corner(self) -> tuple[Fraction, ...]:
        s = self.side
        off = self.grid.offset_at(self.k)
        return tuple((ji + oi) * s for ji, oi in zip(self.j, off))

    @property
    def box(self) -> Box:
        c = self.corner
        s = self.side
        return Box(c, tuple(x + s for x in c))

    @property
    def center(self) -> tuple[Fraction, ...]:
        c = self.corner
        h = self.side / 2
        return tuple(x + h for x in c)

    @property
    def measure(self) -> Fraction:
        return self.side ** self.dim

    def children(self) -> list["Cube"]:
        """The 2^n cubes of the next scale tiling this cube exactly."""
        s = _shift_sign(self.k)
        base = []
        for a, ji in zip(self.grid.alpha, self.j):
            i0 = 2 * ji + (s if a == THIRD else 0)
            base.append((i0, i0 + 1))
        out = []
        for combo in itertools.product(*base):
            out.append(Cube(self.grid, self.k + 1, combo))
        return out

    def parent(self) -> "Cube":
        s = _shift_sign(self.k)
        idx = []
        for a, ji in zip(self.grid.alpha, self.j):
            shift = s if a == THIRD else 0
            idx.append((ji + shift) // 2 if a == THIRD else ji // 2)
        return Cube(self.grid, self.k - 1, tuple(idx))

    def contains_cube(self, other: "Cube") -> bool:
        return self.box.contains_box(other.box)

    def contains_point(self, x) -> bool:
        return self.box.contains_point(x)

    def to_json(self) -> dict:
        return {"grid": self.grid.to_json(), "k": self.k, "j": list(self.j)}

    @staticmethod
    def from_json(data) -> "Cube":
        return Cube(GridId.from_json(data["grid"]), int(data["k"]),
                    tuple(int(x) for x in data["j"]))


def cube_at(grid: GridId, k: int, point) -> Cube:
    """The unique cube of ``grid`` at scale k containing ``point``."""
    s = pow2(-k)
    off = grid.offset_at(k)
    j = tuple(rat_floor(rat(x) / s - o) for x, o in zip(point, off))
    return Cube(grid, k, j)


def cover_cube(q: Box) -> tuple[GridId, Cube]:
    """Smallest-scale grid cube containing ``q`` with sidelength <= 6 * side(q).

    Per axis: pick the scale with 2**-(k0+1) <= 3*side < 2**-k0.  If the
    interval misses every standard gridpoint at that scale it fits in a
    standard interval; otherwise it is short enough to fit in a shifted
    one.  The standard choice is tried first on each axis.
    """
    if not q.is_cube:
        raise ValueError("cover_cube requires equal sidelengths")
    ell = q.side
    k0 = -(floor_log2(3 * ell) + 1)  # 2**-k0 is the least power of 2 > 3*ell
    s = pow2(-k0)
    alpha = []
    index = []
    sign = _shift_sign(k0)
    for a, b in zip(q.lo, q.hi):
        # Standard grid first: does [a, b) avoid all multiples of s?
        j_first = rat_ceil(a / s)
        if Fraction(j_first) * s >= b:
            alpha.append(ZERO)
            index.append(rat_floor(a / s))
        else:
            alpha.append(THIRD)
            index.append(rat_floor(a / s - sign * THIRD))
    grid = GridId(tuple(alpha))
    cube = Cube(grid, k0, tuple(index))
    if not cube.box.contains_box(q):
        raise AssertionError("covering construction failed to contain input")
    return grid, cube


def concentric(box: Box, factor) -> Box:
    """Box with the same center and sides scaled by ``factor`` (rational > 0)."""
    f = rat(factor)
    if f <= 0:
        raise ValueError("scale factor must be positive")
    ctr = box.center
    half = tuple(s * f / 2 for s in box.sides)
    return Box(tuple(c - h for c, h in zip(ctr, half)),
               tuple(c + h for c, h in zip(ctr, half)))


def dilate(q: Cube | Box, m: int) -> Box:
    """Concentric dilate 2**m * q as a Box."""
    if m < 0:
        raise ValueError("dilation exponent must be >= 0")
    box = q.box if isinstance(q, Cube) else q
    return concentric(box, pow2(m))


# ---------------------------------------------------------------------------
# Whitney decomposition of a union of mesh cells.
# ---------------------------------------------------------------------------

def whitney_decompose(mask: np.ndarray, domain: Box, level: int) -> list[Cube]:
    """Whitney decomposition of ``omega`` as maximal standard dyadic cubes.

    ``mask`` marks the cells of the level-``level`` mesh over ``domain``
    that belong to omega (1-D array for n=1, 2-D for n=2); the domain
    must have integer corners so mesh cells are themselves standard
    dyadic cubes.  Output cubes are pairwise disjoint, their union is
    exactly omega, and every cube strictly coarser than a mesh cell has
    its concentric triple 3Q contained in omega.  Each output cube is
    maximal: its parent either is not contained in omega or fails the
    triple test.

    Mesh cells are admitted without the triple test.  At a finite mesh
    the cells along the boundary of omega have triples leaving omega no
    matter what; they stand in for the infinite shrinking tail of the
    continuum decomposition.
    """
    mask = np.asarray(mask, dtype=bool)
    dim = mask.ndim
    if dim not in (1, 2):
        raise ValueError("only dimensions 1 and 2 are supported")
    for a, b in zip(domain.lo, domain.hi):
        if a.denominator != 1 or b.denominator != 1:
            raise ValueError("whitney_decompose requires integer domain corners")
    if not mask.any():
        return []
    if mask.all():
        raise ValueError("omega equal to the whole domain admits no Whitney cube")
    n_axis = mask.shape[0]
    if n_axis % (1 << level):
        raise ValueError("mask shape does not match an integer-sided domain")
    grid = GridId.standard(dim)
    lo_int = [a.numerator for a in domain.lo]

    if dim == 1:
        pref = np.concatenate(([0], np.cumsum(mask.astype(np.int64))))

        def count(rng):
            (a, b), = rng
            return int(pref[b] - pref[a])
    else:
        sat = np.zeros((n_axis + 1,) * 2, dtype=np.int64)
        sat[1:, 1:] = mask.astype(np.int64).cumsum(0).cumsum(1)

        def count(rng):
            (r0, r1), (c0, c1) = rng
            return int(sat[r1, c1] - sat[r0, c1] - sat[r1, c0] + sat[r0, c0])

    def cells(rng):
        total = 1
        for a, b in rng:
            total *= b - a
        return total

    def omega_full(rng):
        for a, b in rng:
            if a < 0 or b > n_axis:
                return False
        return count(rng) == cells(rng)

    out: list[Cube] = []

    def emit(depth, starts):
        size = 1 << (level - depth)
        j = tuple(lo_int[d] * (1 << depth) + starts[d] // size for d in range(dim))
        out.append(Cube(grid, depth, j))

    def rec(depth, starts):
        size = 1 << (level - depth)
        rng = tuple((s, s + size) for s in starts)
        inside = count(rng)
        if inside == 0:
            return
        if inside == cells(rng):
            triple = tuple((s - size, s + 2 * size) for s in starts)
            if depth == level or omega_full(triple):
                emit(depth, starts)
                return
        if depth == level:
            return
        half = size // 2
        for combo in itertools.product((0, half), repeat=dim):
            rec(depth + 1, tuple(s + c for s, c in zip(starts, combo)))

    roots = range(0, n_axis, 1 << level)
    for combo in itertools.product(roots, repeat=dim):
        rec(0, combo)
    return out
