"""A2 weights, weighted norms, and the empirical linearity scan.

A weight is a step function with strictly positive cell values.  Its A2
constant on the desk model is the exact maximum of

    (1/|R|) ∫_R w  ·  (1/|R|) ∫_R w⁻¹

over a finite search family: every mesh-corner-aligned cube plus every
grid cube of every shifted grid (clipped to the domain).  The maximum is
certified exactly: a float64 prescreen over all mesh-aligned windows
narrows the field to candidates within a relative band that provably
covers the rounding error, and those candidates — together with the
per-size float argmaxes and all clipped grid cubes — are re-evaluated in
rational arithmetic.

Operator norms in L²(w) are estimated from below by power iteration on
the w-normal operator T*_w T, where T*_w = w⁻¹ Tᵗ w is the exact adjoint
for the weighted pairing ⟨f, g⟩_w = Σ f g w h^n.  Estimates are Rayleigh
quotients, hence monotone nondecreasing in the iteration count, and every
run spot-checks the duality identity ⟨Tf, g⟩_w = ⟨f, T*_w g⟩_w.
"""

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product as iter_product

import numpy as np

from .rational import rat, rat_str, pow2
from .geometry import Box, Cube, GridId
from .stepfn import Mesh, StepFunction, _top_scale
from .sparse import SparseFamily, verify_sparse_family

__all__ = [
    "Weight",
    "A2Report",
    "a2_constant",
    "weighted_norm",
    "CellOperator",
    "identity_operator",
    "sparse_family_operator",
    "amalgam_pair_operator",
    "hilbert_full_operator",
    "tower_family",
    "NormEstimate",
    "operator_norm_weighted",
    "ScanRow",
    "ScanTable",
    "a2_scan",
]

# ---------------------------------------------------------------------------
# weights
# ---------------------------------------------------------------------------

class Weight:
    """Strictly positive step function together with its exact reciprocal."""

    def __init__(self, fn: StepFunction):
        if any(v <= 0 for v in fn.values):
            raise ValueError("weight values must be strictly positive")
        self.fn = fn
        self.reciprocal = StepFunction(fn.mesh, [1 / v for v in fn.values])

    @property
    def mesh(self) -> Mesh:
        return self.fn.mesh

    @staticmethod
    def constant(mesh: Mesh, c) -> "Weight":
        c = rat(c)
        return Weight(StepFunction.constant(mesh, c))

    @staticmethod
    def power(mesh: Mesh, a: float, center=Fraction(1, 2)) -> "Weight":
        """w(x) = |x - center|^a sampled at cell centers (n=1) or
        w(x,y) = max(|x-cx|,|y-cy|)^a (n=2), frozen to exact rationals."""
        if mesh.dim == 1:
            c = rat(center)
            centers = [mesh.cell_box((i,)).center[0] for i in range(mesh.size)]
            dists = [abs(x - c) for x in centers]
        else:
            c = (rat(center), rat(center))
            dists = []
            for flat in range(mesh.size):
                pt = mesh.cell_box(mesh.unflat(flat)).center
                dists.append(max(abs(pt[0] - c[0]), abs(pt[1] - c[1])))
        if any(d == 0 for d in dists):
            raise ValueError("power-weight center hits a cell center")
        vals = [rat(float(d) ** a) for d in dists]
        return Weight(StepFunction(mesh, vals))

    def scaled(self, c) -> "Weight":
        return Weight(self.fn * rat(c))


def weighted_norm(f: StepFunction, w: Weight) -> float:
    """L²(w) norm: exact Σ f²·w·h^n, then one float64 square root."""
    if f.mesh != w.mesh:
        raise ValueError("mesh mismatch")
    scale = f.mesh.h ** f.mesh.dim
    total = scale * sum(v * v * wv for v, wv in zip(f.values, w.fn.values))
    return math.sqrt(float(total))


# ---------------------------------------------------------------------------
# A2 constant
# ---------------------------------------------------------------------------

@dataclass
class A2Report:
    constant: Fraction
    witness: Box
    witness_kind: str
    search: str
    candidates_confirmed: int

    def to_json(self) -> dict:
        return {
            "constant": rat_str(self.constant),
            "constant_float": float(self.constant),
            "witness": self.witness.to_json(),
            "witness_kind": self.witness_kind,
            "search": self.search,
            "candidates_confirmed": self.candidates_confirmed,
        }


def _grid_cube_regions(mesh: Mesh):
    """All (cube, clipped box) pairs over every grid and every scale from
    the mesh up to the domain cover."""
    dom = mesh.domain
    for grid in GridId.all_grids(mesh.dim):
        for k in range(mesh.level, _top_scale(mesh) - 1, -1):
            s = pow2(-k)
            off = grid.offset_at(k)
            ranges = []
            for a in range(mesh.dim):
                j0 = math.floor((dom.lo[a] - off[a]) / s)
                j1 = math.ceil((dom.hi[a] - off[a]) / s)
                ranges.append(range(j0, j1))
            for j in iter_product(*ranges):
                cube = Cube(grid, k, j)
                region = cube.box.intersect(dom)
                if region is not None and region.measure > 0:
                    yield cube, region


def _window_sum_exact(vals, i, j) -> Fraction:
    """Exact Σ vals[i:j].

    Uses a common-denominator integer sum while the lcm of the cell
    denominators stays small (simple rational weights), and otherwise a
    gcd-free numerator/denominator accumulation where every step is a
    big×small multiply with one normalization at the end (float-frozen
    weights, whose reciprocals have unrelated 53-bit denominators).
    """
    lcm = 1
    for v in vals[i:j]:
        lcm = lcm * v.denominator // math.gcd(lcm, v.denominator)
        if lcm.bit_length() > 64:
            break
    else:
        return Fraction(
            sum(v.numerator * (lcm // v.denominator) for v in vals[i:j]), lcm)
    num, den = 0, 1
    for v in vals[i:j]:
        num = num * v.denominator + v.numerator * den
        den *= v.denominator
    return Fraction(num, den)


def _certified_band(w: Weight, eps: float) -> float:
    """Relative error bound for floating prescreen window sums.

    A cumulative sum of N nonnegative values has absolute error at most
    N·eps·total, and every window mass is at least the smallest single
    cell value, so the relative error of any window sum is at most
    N·eps·total/min.  The band doubles that for the two factors and adds
    an order-of-magnitude safety factor.
    """
    n = w.mesh.size
    bound = 0.0
    for g in (w.fn, w.reciprocal):
        fl = [float(v) for v in g.values]
        bound += 4.0 * n * eps * sum(fl) / min(fl)
    band = 16.0 * bound + 1e-14
    if band > 1e-4:
        raise ValueError("weight too ill-conditioned for a certified search")
    return band


def _mesh_max_1d(w: Weight):
    """Exact max of avg(w)·avg(w⁻¹) over mesh intervals.

    Extended-precision prescreen over every window, then exact rational
    confirmation of all candidates within the certified error band."""
    n = w.mesh.size
    band = _certified_band(w, float(np.finfo(np.longdouble).eps))
    fw = np.cumsum(np.concatenate(
        [[0.0], [float(v) for v in w.fn.values]]).astype(np.longdouble))
    fv = np.cumsum(np.concatenate(
        [[0.0], [float(v) for v in w.reciprocal.values]]).astype(np.longdouble))

    def prods(d):
        return (fw[d:] - fw[:-d]) * (fv[d:] - fv[:-d]) / np.longdouble(d * d)

    per_d_max = np.zeros(n + 1, dtype=np.longdouble)
    for d in range(1, n + 1):
        per_d_max[d] = prods(d).max()
    best = float(per_d_max.max())
    thresh = best * (1.0 - band)

    best_exact = Fraction(0)
    best_win = (0, 1)
    confirmed = 0
    for d in range(1, n + 1):
        if float(per_d_max[d]) < thresh:
            continue
        p = prods(d)
        for i in np.nonzero(p >= thresh)[0]:
            i = int(i)
            sw = _window_sum_exact(w.fn.values, i, i + d)
            sv = _window_sum_exact(w.reciprocal.values, i, i + d)
            exact = sw * sv / (d * d)
            confirmed += 1
            if exact > best_exact:
                best_exact, best_win = exact, (i, i + d)
    h = w.mesh.h
    lo = w.mesh.domain.lo[0]
    box = Box.interval(lo + best_win[0] * h, lo + best_win[1] * h)
    return best_exact, box, confirmed


def _mesh_max_2d(w: Weight):
    """Exact max over mesh-corner-aligned squares via float summed-area
    prescreen plus exact confirmation."""
    mesh = w.mesh
    band = _certified_band(w, float(np.finfo(np.float64).eps))
    n = mesh.cells_axis
    aw = np.array([float(v) for v in w.fn.values]).reshape(n, n)
    av = np.array([float(v) for v in w.reciprocal.values]).reshape(n, n)
    sw = np.zeros((n + 1, n + 1))
    sv = np.zeros((n + 1, n + 1))
    sw[1:, 1:] = aw.cumsum(0).cumsum(1)
    sv[1:, 1:] = av.cumsum(0).cumsum(1)

    def windows(s, d):
        return (s[d:, d:] - s[:-d, d:] - s[d:, :-d] + s[:-d, :-d])

    per_d = []
    best = 0.0
    for d in range(1, n + 1):
        prod = windows(sw, d) * windows(sv, d) / float(d) ** 4
        flat = int(np.argmax(prod))
        i, j = divmod(flat, prod.shape[1])
        per_d.append((d, i, j, float(prod[i, j])))
        best = max(best, float(prod[i, j]))
    thresh = best * (1.0 - band)

    rows = w.fn._rows(False)
    rows_v = w.reciprocal._rows(False)

    def exact_window(i, j, d):
        tw = sum(rows[r][j + d] - rows[r][j] for r in range(i, i + d))
        tv = sum(rows_v[r][j + d] - rows_v[r][j] for r in range(i, i + d))
        return tw * tv / Fraction(d) ** 4

    best_exact = Fraction(0)
    best_win = (0, 0, 1)
    confirmed = 0
    for d, ai, aj, dmax in per_d:
        exact = exact_window(ai, aj, d)
        confirmed += 1
        if exact > best_exact:
            best_exact, best_win = exact, (ai, aj, d)
        if dmax >= thresh:
            prod = windows(sw, d) * windows(sv, d) / float(d) ** 4
            for i, j in zip(*np.nonzero(prod >= thresh)):
                exact = exact_window(int(i), int(j), d)
                confirmed += 1
                if exact > best_exact:
                    best_exact, best_win = exact, (int(i), int(j), d)
    h = mesh.h
    lo = mesh.domain.lo
    i, j, d = best_win
    box = Box((lo[0] + i * h, lo[1] + j * h),
              (lo[0] + (i + d) * h, lo[1] + (j + d) * h))
    return best_exact, box, confirmed


def _region_integral_exact(g: StepFunction, region: Box) -> Fraction:
    """Exact ∫_region g for a 1-d region, gcd-free inner summation."""
    mesh = g.mesh
    ia, ib, partials = mesh.axis_pieces(0, region.lo[0], region.hi[0])
    total = mesh.h * _window_sum_exact(g.values, ia, ib)
    for i, width in partials:
        total += width * g.values[i]
    return total


def _grid_max_1d(w: Weight, band: float):
    """Max of the A2 product over clipped grid cubes: extended-precision
    prescreen, exact confirmation of the banded candidates."""
    mesh = w.mesh
    h = np.longdouble(float(mesh.h))
    fw = np.cumsum(np.concatenate(
        [[0.0], [float(v) for v in w.fn.values]]).astype(np.longdouble)) * h
    fv = np.cumsum(np.concatenate(
        [[0.0], [float(v) for v in w.reciprocal.values]]).astype(np.longdouble)) * h

    def approx_integral(pref, vals, pieces):
        ia, ib, partials = pieces
        s = pref[ib] - pref[ia]
        for i, width in partials:
            s += np.longdouble(float(width)) * np.longdouble(float(vals[i]))
        return s

    scored = []
    for cube, region in _grid_cube_regions(mesh):
        pieces = mesh.axis_pieces(0, region.lo[0], region.hi[0])
        m = np.longdouble(float(region.measure))
        val = (approx_integral(fw, w.fn.values, pieces)
               * approx_integral(fv, w.reciprocal.values, pieces)) / (m * m)
        scored.append((float(val), region))
    if not scored:
        return Fraction(0), None, 0
    top = max(s for s, _ in scored)
    thresh = top * (1.0 - band)
    best_exact = Fraction(0)
    best_region = None
    confirmed = 0
    for s, region in scored:
        if s < thresh:
            continue
        m = region.measure
        val = (_region_integral_exact(w.fn, region) / m) \
            * (_region_integral_exact(w.reciprocal, region) / m)
        confirmed += 1
        if val > best_exact:
            best_exact, best_region = val, region
    return best_exact, best_region, confirmed


def a2_constant(w: Weight) -> A2Report:
    """Exact max of avg(w,R)·avg(w⁻¹,R) over the search family: all
    mesh-corner-aligned cubes and all grid cubes of all 2ⁿ shifted grids
    (clipped to the domain)."""
    mesh = w.mesh
    if all(v == w.fn.values[0] for v in w.fn.values):
        # every average is the cell value, so every product is exactly 1
        return A2Report(
            constant=Fraction(1),
            witness=mesh.cell_box((0,) * mesh.dim),
            witness_kind="mesh-aligned",
            search="constant weight: every region gives exactly 1",
            candidates_confirmed=1,
        )
    if mesh.dim == 1:
        best, box, confirmed = _mesh_max_1d(w)
        kind = "mesh-aligned"
        band = _certified_band(w, float(np.finfo(np.longdouble).eps))
        gbest, gbox, gcount = _grid_max_1d(w, band)
        confirmed += gcount
        if gbest > best:
            best, box, kind = gbest, gbox, "grid-cube"
    else:
        best, box, confirmed = _mesh_max_2d(w)
        kind = "mesh-aligned"
        for cube, region in _grid_cube_regions(mesh):
            m = region.measure
            val = (w.fn.integral(region) / m) \
                * (w.reciprocal.integral(region) / m)
            confirmed += 1
            if val > best:
                best, box, kind = val, region, "grid-cube"
    return A2Report(
        constant=best,
        witness=box,
        witness_kind=kind,
        search="search-family constant: mesh-corner-aligned cubes + "
               "all shifted-grid cubes clipped to the domain",
        candidates_confirmed=confirmed,
    )


# ---------------------------------------------------------------------------
# linear operators on cell-value vectors
# ---------------------------------------------------------------------------

@dataclass
class CellOperator:
    """Float64 linear operator on cell-value vectors with exact transpose.

    ``apply_t`` must be the transpose for the *unweighted* pairing; the
    weighted adjoint w⁻¹ Aᵗ w is formed where needed.
    """

    name: str
    size: int
    _apply: callable
    _apply_t: callable

    def apply(self, v: np.ndarray) -> np.ndarray:
        return self._apply(np.asarray(v, dtype=float))

    def apply_t(self, v: np.ndarray) -> np.ndarray:
        return self._apply_t(np.asarray(v, dtype=float))

    def dense(self) -> np.ndarray:
        if self.size > 4096:
            raise ValueError("dense matrix only for small instances")
        cols = [self.apply(np.eye(self.size)[:, i]) for i in range(self.size)]
        return np.stack(cols, axis=1)


def identity_operator(mesh: Mesh) -> CellOperator:
    return CellOperator("identity", mesh.size, lambda v: v.copy(),
                        lambda v: v.copy())


def _atom_range(mesh: Mesh, box: Box) -> tuple[int, int]:
    return mesh.axis_atoms(0, box.lo[0], box.hi[0])


def sparse_family_operator(mesh: Mesh, fam: SparseFamily) -> CellOperator:
    """A_S f = Σ avg(f, Q)·χ_Q as a float matvec (n=1).

    Averages are geometric (integral over Q / |Q|); for cubes inside the
    domain this is the atom mean.  The matrix is symmetric.
    """
    if mesh.dim != 1:
        raise ValueError("operator adapters are one-dimensional")
    h = float(mesh.h)
    spans = []
    for _, q in fam.pairs():
        a, b = _atom_range(mesh, q.box)
        if a < b:
            spans.append((a, b, h / float(q.box.measure)))

    def apply(v):
        out = np.zeros_like(v)
        for a, b, coeff in spans:
            out[a:b] += coeff * v[a:b].sum()
        return out

    return CellOperator("sparse:%d-cubes" % len(spans), mesh.size,
                        apply, apply)


def amalgam_pair_operator(mesh: Mesh, sh) -> CellOperator:
    """T_m f = Σ avg(f, cover)·χ_q as a float matvec; transpose is the
    adjoint Σ avg over q placed on the cover."""
    if mesh.dim != 1:
        raise ValueError("operator adapters are one-dimensional")
    h = float(mesh.h)
    spans = []
    for alpha in GridId.all_grids(1):
        for _, q, cover in sh.family_of(alpha):
            qa, qb = _atom_range(mesh, q.box)
            ca, cb = _atom_range(mesh, cover.box)
            spans.append((qa, qb, ca, cb, h / float(cover.box.measure)))

    def apply(v):
        out = np.zeros_like(v)
        for qa, qb, ca, cb, coeff in spans:
            out[qa:qb] += coeff * v[ca:cb].sum()
        return out

    def apply_t(v):
        out = np.zeros_like(v)
        for qa, qb, ca, cb, coeff in spans:
            out[ca:cb] += coeff * v[qa:qb].sum()
        return out

    return CellOperator("amalgam:m=%d" % sh.m, mesh.size, apply, apply_t)


def hilbert_full_operator(mesh: Mesh) -> CellOperator:
    """Full-truncation Hilbert matrix: entry (i,j) = ∫_{cell j} dy/(x_i−y)
    for j ≠ i, zero on the diagonal.

    The entries are Toeplitz and h-independent: t_d = log((d+½)/(d−½)) for
    d = i−j ≥ 1 and t_{−d} = −t_d, so the matvec is one FFT convolution.
    """
    if mesh.dim != 1:
        raise ValueError("operator adapters are one-dimensional")
    n = mesh.size
    d = np.arange(1, n)
    t = np.log((2 * d + 1.0) / (2 * d - 1.0))
    kernel = np.concatenate([-t[::-1], [0.0], t])  # index d+(n-1), d=-n+1..n-1
    m = 1 << (3 * n - 3).bit_length()
    kernel_hat = np.fft.rfft(kernel, m)

    def apply(v):
        conv = np.fft.irfft(kernel_hat * np.fft.rfft(v, m), m)
        return conv[n - 1:2 * n - 1]

    def apply_t(v):
        return -apply(v)

    return CellOperator("hilbert-full", n, apply, apply_t)


def tower_family(mesh: Mesh, center=Fraction(1, 2)) -> SparseFamily:
    """Maximally sparse nested family: [0,1) and then the dyadic halves
    [c, c+2^{-k}) shrinking toward c = center (default 1/2), one cube per
    level down to the mesh scale."""
    if mesh.dim != 1:
        raise ValueError("tower family is one-dimensional")
    c = rat(center)
    levels = {0: [Cube(GridId.standard(1), 0, (0,))]}
    for k in range(1, mesh.level + 1):
        j = c / pow2(-k)
        if j.denominator != 1:
            raise ValueError("tower center must be dyadic")
        levels[k] = [Cube(GridId.standard(1), k, (int(j),))]
    fam = SparseFamily(grid=GridId.standard(1), levels=levels)
    verify_sparse_family(fam)
    return fam


# ---------------------------------------------------------------------------
# operator norm estimation
# ---------------------------------------------------------------------------

@dataclass
class NormEstimate:
    value: float
    converged: bool
    iterations: int
    duality_gap: float

    def to_json(self) -> dict:
        return {"value": self.value, "converged": self.converged,
                "iterations": self.iterations,
                "duality_gap": self.duality_gap}


def operator_norm_weighted(op: CellOperator, w: Weight, iters: int = 60,
                           seed: int = 0, tol: float = 1e-9) -> NormEstimate:
    """Largest Rayleigh quotient of the w-normal operator found by power
    iteration: a lower bound for ‖op‖_{L²(w)}.

    Deterministic given the seed and monotone nondecreasing in ``iters``.
    Each run spot-checks the duality identity ⟨Tf,g⟩_w = ⟨f,T*g⟩_w.
    """
    if iters < 10:
        raise ValueError("need at least 10 iterations")
    if op.size != w.mesh.size:
        raise ValueError("operator/weight size mismatch")
    wv = np.array([float(v) for v in w.fn.values])
    h = float(w.mesh.h) ** w.mesh.dim

    def norm_w(v):
        return math.sqrt(h * float(np.dot(v * v, wv)))

    def adjoint_w(v):
        return op.apply_t(wv * v) / wv

    rng = np.random.default_rng(seed)
    f, g = rng.standard_normal(op.size), rng.standard_normal(op.size)
    lhs = h * float(np.dot(op.apply(f) * g, wv))
    rhs = h * float(np.dot(f * adjoint_w(g), wv))
    gap = abs(lhs - rhs) / max(abs(lhs), abs(rhs), 1e-30)
    if gap > 1e-6:
        raise ValueError("duality spot-check failed: gap %.3e" % gap)

    v = rng.standard_normal(op.size)
    v /= norm_w(v)
    best = 0.0
    converged = False
    used = 0
    for it in range(1, iters + 1):
        tv = op.apply(v)
        sigma = norm_w(tv)
        used = it
        if sigma <= best * (1 + tol) and it >= 10:
            best = max(best, sigma)
            converged = True
            break
        best = max(best, sigma)
        z = adjoint_w(tv)
        nz = norm_w(z)
        if nz == 0.0:
            converged = True
            break
        v = z / nz
    return NormEstimate(value=best, converged=converged, iterations=used,
                        duality_gap=gap)


# ---------------------------------------------------------------------------
# the linearity scan
# ---------------------------------------------------------------------------

@dataclass
class ScanRow:
    a: float
    a2: float
    opnorm: float
    ratio: float
    a2_exact: Fraction
    converged: bool

    def to_json(self) -> dict:
        # exact constants from power weights can have numerators far past
        # any sensible decimal printout; keep the verbatim rational only
        # when it is small enough to read
        q = self.a2_exact
        small = (q.numerator.bit_length() < 4096
                 and q.denominator.bit_length() < 4096)
        return {"a": self.a, "A2": self.a2, "opnorm": self.opnorm,
                "ratio": self.ratio,
                "A2_exact": rat_str(q) if small else None,
                "converged": self.converged}


@dataclass
class ScanTable:
    kind: str
    level: int
    center: Fraction
    rows: list[ScanRow] = field(default_factory=list)
    slope: float = 0.0
    intercept: float = 0.0

    def to_json(self) -> dict:
        return {"kind": self.kind, "level": self.level,
                "center": rat_str(self.center),
                "rows": [r.to_json() for r in self.rows],
                "slope": self.slope, "intercept": self.intercept}

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf)
        writer.writerow(["a", "A2", "opnorm", "ratio"])
        for r in self.rows:
            writer.writerow([repr(r.a), repr(r.a2), repr(r.opnorm),
                             repr(r.ratio)])
        return buf.getvalue()

    def to_gnuplot(self) -> str:
        lines = ["# A2 opnorm"]
        for r in self.rows:
            lines.append("%r %r" % (r.a2, r.opnorm))
        return "\n".join(lines) + "\n"


def _scan_operator(kind: str, mesh: Mesh, center) -> CellOperator:
    if kind == "sparse":
        return sparse_family_operator(mesh, tower_family(mesh, center))
    if kind == "hilbert":
        return hilbert_full_operator(mesh)
    raise ValueError("unknown operator kind: %r" % kind)


def a2_scan(kind: str, exponents, level: int, seed: int = 0,
            center=Fraction(1, 2), iters: int = 80,
            workers: int = 1) -> ScanTable:
    """Scan ‖op‖_{L²(w_a)} against the A₂ constant of w_a(x) = |x−c|^a.

    Each exponent must lie in (−1, 1) (the weight is A₂ in the continuum).
    Rows are independent pure computations with derived seeds; ``workers``
    > 1 runs them in a thread pool, ordering is by exponent index either
    way.
    """
    exponents = list(exponents)
    for a in exponents:
        if not -1 < a < 1:
            raise ValueError("exponent %r outside (-1, 1)" % a)
    mesh = Mesh(dim=1, level=level)
    center = rat(center)
    op = _scan_operator(kind, mesh, center)

    def row(idx_a):
        idx, a = idx_a
        w = (Weight.constant(mesh, 1) if a == 0
             else Weight.power(mesh, a, center))
        rep = a2_constant(w)
        est = operator_norm_weighted(op, w, iters=iters, seed=seed ^ idx)
        a2 = float(rep.constant)
        return ScanRow(a=float(a), a2=a2, opnorm=est.value,
                       ratio=est.value / a2, a2_exact=rep.constant,
                       converged=est.converged)

    jobs = list(enumerate(exponents))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(row, jobs))
    else:
        rows = [row(j) for j in jobs]

    table = ScanTable(kind=kind, level=level, center=center, rows=rows)
    if len(rows) >= 2:
        xs = np.array([r.a2 for r in rows])
        ys = np.array([r.opnorm for r in rows])
        slope, intercept = np.polyfit(xs, ys, 1)
        table.slope, table.intercept = float(slope), float(intercept)
    return table
