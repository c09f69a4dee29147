"""Experiment harness: configuration, seeded instance generation, the
acceptance-criteria registry, and verdict serialization.

Every criterion is a pure function of an ExperimentConfig; trials derive
per-trial seeds as seed^index, so reports do not depend on execution
order.  Failing verdicts carry a replayable witness (criterion id, seed,
config, and the offending instance descriptor).
"""

import math
import random
import time
from dataclasses import dataclass, field, asdict
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .rational import rat, rat_str, pow2
from .geometry import Box, Cube, GridId, cover_cube
from .stepfn import (
    Mesh,
    StepFunction,
    average,
    dyadic_maximal,
    hl_maximal,
    local_mean_oscillation,
)
from .sparse import (
    amalgam_adjoint,
    cz_pointwise_gap,
    cz_sparse,
    oscillation_decompose,
    sparse_operator,
    split_families,
    verify_decomposition,
    verify_sparse_family,
    weak_norm,
)
from .czo import dominate, hilbert_apply, maximal_truncated, \
    oscillation_estimate_report
from .weights import a2_scan

__all__ = [
    "ExperimentConfig",
    "Verdict",
    "generate_function",
    "CRITERION_IDS",
    "default_config",
    "run_criterion",
    "run_all",
]

GENERATOR_KINDS = ("spike", "indicator-sums", "random-cells", "power-profile")


@dataclass
class ExperimentConfig:
    dim: int = 1
    level: int = 6
    seed: int = 0
    trials: int = 20
    m_list: tuple = (1, 2, 4)
    lam: Fraction = None
    kind: str = "random-cells"
    operator: str = "sparse"
    fmt: str = "json"
    out: str = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError("dim must be 1 or 2")
        cap = 14 if self.dim == 1 else 7
        if not 1 <= self.level <= cap:
            raise ValueError("level %d exceeds the desk-scale cap %d for "
                             "dim %d" % (self.level, cap, self.dim))
        if self.lam is None:
            self.lam = pow2(-(self.dim + 2))
        else:
            self.lam = rat(self.lam)
        if not 0 < self.lam < 1:
            raise ValueError("lambda must lie in (0,1)")
        if self.trials < 1:
            raise ValueError("trials must be positive")
        if self.kind not in GENERATOR_KINDS:
            raise ValueError("unknown generator kind: %r" % self.kind)
        if self.operator not in ("sparse", "hilbert"):
            raise ValueError("operator must be 'sparse' or 'hilbert'")
        if self.fmt not in ("json", "csv"):
            raise ValueError("format must be 'json' or 'csv'")
        self.m_list = tuple(int(m) for m in self.m_list)

    def mesh(self) -> Mesh:
        return Mesh(dim=self.dim, level=self.level)

    def replaced(self, **kw) -> "ExperimentConfig":
        data = asdict(self)
        data.update(kw)
        return ExperimentConfig(**data)

    def to_json(self) -> dict:
        return {"dim": self.dim, "level": self.level, "seed": self.seed,
                "trials": self.trials, "m_list": list(self.m_list),
                "lam": rat_str(self.lam), "kind": self.kind,
                "operator": self.operator}


@dataclass
class Verdict:
    criterion: str
    passed: bool
    measured: dict
    config: ExperimentConfig
    witness: dict = None
    elapsed: float = 0.0

    def to_json(self) -> dict:
        # elapsed is deliberately left out: a (config, seed) pair must
        # reproduce this document bit for bit
        return {"criterion": self.criterion,
                "passed": self.passed,
                "measured": self.measured,
                "config": self.config.to_json(),
                "witness": self.witness}


# ---------------------------------------------------------------------------
# instance generation
# ---------------------------------------------------------------------------

def _core_cells(mesh: Mesh):
    core = mesh.core
    if mesh.dim == 1:
        a, b = mesh.axis_atoms(0, core.lo[0], core.hi[0])
        return [(i,) for i in range(a, b)]
    a0, b0 = mesh.axis_atoms(0, core.lo[0], core.hi[0])
    a1, b1 = mesh.axis_atoms(1, core.lo[1], core.hi[1])
    return [(i, j) for i in range(a0, b0) for j in range(a1, b1)]


def generate_function(seed: int, spec: str, mesh: Mesh) -> StepFunction:
    """Deterministic core-supported test function with small rational
    values.

    spike: one loaded cell.  indicator-sums: sum of three dyadic interval
    indicators (values in 0..3).  random-cells: independent integers in
    [-8, 8].  power-profile: eighths-rounded |x-x0|^p bump.
    """
    if spec not in GENERATOR_KINDS:
        raise ValueError("unknown generator spec: %r" % spec)
    rng = random.Random("%d:%s" % (seed, spec))
    cells = _core_cells(mesh)
    vals = [Fraction(0)] * mesh.size

    if spec == "spike":
        vals[mesh.flat(rng.choice(cells))] = Fraction(rng.randrange(1, 9))
    elif spec == "indicator-sums":
        core = mesh.core
        for _ in range(3):
            k = rng.randrange(1, min(mesh.level, 6) + 1)
            side = pow2(-k)
            corner = tuple(
                core.lo[a] + rng.randrange(0, 2 ** k) * side
                for a in range(mesh.dim))
            box = Box(corner, tuple(c + side for c in corner))
            for idx in cells:
                if box.contains_point(mesh.cell_box(idx).center):
                    vals[mesh.flat(idx)] += 1
    elif spec == "random-cells":
        for idx in cells:
            vals[mesh.flat(idx)] = Fraction(rng.randrange(-8, 9))
    else:  # power-profile
        p = rng.choice((Fraction(1, 2), Fraction(1), Fraction(2)))
        x0 = tuple(Fraction(rng.randrange(0, 16), 16) for _ in range(mesh.dim))
        amp = rng.randrange(1, 5)
        for idx in cells:
            center = mesh.cell_box(idx).center
            d = max(abs(c - x) for c, x in zip(center, x0))
            vals[mesh.flat(idx)] = Fraction(
                round(8 * amp * float(d) ** float(p)), 8)
    return StepFunction(mesh, vals)


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------

def _crit_cover(cfg: ExperimentConfig) -> Verdict:
    """Random rational boxes are contained in their cover cube with side
    at most 6x, exactly."""
    worst = Fraction(0)
    witness = None
    trials_1d = cfg.trials
    trials_2d = max(1, cfg.trials // 10)
    rng = random.Random(cfg.seed)

    def one(dim):
        nonlocal worst, witness
        lo = tuple(Fraction(rng.randrange(-4000, 4001),
                            rng.randrange(1, 64)) for _ in range(dim))
        side = Fraction(rng.randrange(1, 2048), rng.randrange(256, 2048))
        box = Box(lo, tuple(x + side for x in lo))
        grid, cube = cover_cube(box)
        ok = cube.box.contains_box(box) and cube.side <= 6 * side
        ratio = cube.side / side
        if ratio > worst:
            worst = ratio
        if not ok and witness is None:
            witness = {"box": box.to_json(), "grid": grid.to_json()}

    for _ in range(trials_1d):
        one(1)
    for _ in range(trials_2d):
        one(2)
    return Verdict(
        criterion="cover-6x",
        passed=witness is None,
        measured={"trials_1d": trials_1d, "trials_2d": trials_2d,
                  "max_side_ratio": float(worst)},
        config=cfg, witness=witness)


def _crit_sparse_invariants(cfg: ExperimentConfig) -> Verdict:
    """cz_sparse families satisfy the sparse-family invariants and the
    pointwise bound M^d f <= 2^{n+1} A_S f, exactly."""
    mesh = cfg.mesh()
    min_gap = None
    witness = None
    families = 0
    for t in range(cfg.trials):
        f = generate_function(cfg.seed ^ t, cfg.kind, mesh)
        for grid in GridId.all_grids(cfg.dim):
            try:
                fam = cz_sparse(f, grid)
                verify_sparse_family(fam)
            except (ValueError, AssertionError) as e:
                witness = witness or {"trial": t, "grid": grid.to_json(),
                                      "error": str(e)}
                continue
            families += 1
            if fam.is_empty:
                continue
            gap = cz_pointwise_gap(f, fam, dyadic_maximal(f, grid))
            if min_gap is None or gap < min_gap:
                min_gap = gap
            if gap < 0 and witness is None:
                witness = {"trial": t, "grid": grid.to_json(),
                           "gap": rat_str(gap)}
    return Verdict(
        criterion="sparse-invariants",
        passed=witness is None and (min_gap is None or min_gap >= 0),
        measured={"families_checked": families,
                  "min_pointwise_gap": None if min_gap is None
                  else float(min_gap)},
        config=cfg, witness=witness)


def _crit_maximal_sandwich(cfg: ExperimentConfig) -> Verdict:
    """Mf <= 6^n · Σ_α M^{D_α}f and Mf <= 2·12^n · Σ_α A_{S_α}f cellwise."""
    mesh = cfg.mesh()
    n = cfg.dim
    c_grid = Fraction(6 ** n)
    c_sparse = Fraction(2 * 12 ** n)
    witness = None
    worst_grid = worst_sparse = None
    for t in range(cfg.trials):
        g = abs(generate_function(cfg.seed ^ t, cfg.kind, mesh))
        big = hl_maximal(g)
        sum_dyadic = StepFunction.zeros(mesh)
        sum_sparse = StepFunction.zeros(mesh)
        for grid in GridId.all_grids(n):
            sum_dyadic = sum_dyadic + dyadic_maximal(g, grid)
            fam = cz_sparse(g, grid)
            if not fam.is_empty:
                sum_sparse = sum_sparse + sparse_operator(fam, g)
        for i in range(mesh.size):
            lhs = big.values[i]
            gap_g = c_grid * sum_dyadic.values[i] - lhs
            gap_s = c_sparse * sum_sparse.values[i] - lhs
            if worst_grid is None or gap_g < worst_grid:
                worst_grid = gap_g
            if worst_sparse is None or gap_s < worst_sparse:
                worst_sparse = gap_s
            if (gap_g < 0 or gap_s < 0) and witness is None:
                witness = {"trial": t, "cell": i,
                           "grid_gap": rat_str(gap_g),
                           "sparse_gap": rat_str(gap_s)}
    return Verdict(
        criterion="maximal-sandwich",
        passed=witness is None,
        measured={"min_grid_gap": float(worst_grid),
                  "min_sparse_gap": float(worst_sparse),
                  "trials": cfg.trials},
        config=cfg, witness=witness)


def _crit_decomposition(cfg: ExperimentConfig) -> Verdict:
    """|f - m_f(Q0)| <= 4·M^{#,d}f + 2·Σ ω·χ on every cell of Q0."""
    mesh = cfg.mesh()
    q0 = Cube(GridId.standard(cfg.dim), 0, (0,) * cfg.dim)
    min_gap = None
    witness = None
    sizes = []
    for t in range(cfg.trials):
        kind = GENERATOR_KINDS[t % len(GENERATOR_KINDS)]
        f = generate_function(cfg.seed ^ t, kind, mesh)
        res = oscillation_decompose(f, q0)
        gap = verify_decomposition(f, res)
        sizes.append(res.family.cube_count())
        if min_gap is None or gap < min_gap:
            min_gap = gap
        if gap < 0 and witness is None:
            witness = {"trial": t, "seed": cfg.seed ^ t,
                       "gap": rat_str(gap)}
    return Verdict(
        criterion="osc-decomposition",
        passed=witness is None,
        measured={"trials": cfg.trials, "min_gap": float(min_gap),
                  "mean_family_size": sum(sizes) / len(sizes),
                  "lambda": rat_str(cfg.lam)},
        config=cfg, witness=witness)


def _crit_l2_bound(cfg: ExperimentConfig) -> Verdict:
    """‖A*_{m,α} f‖₂ <= 8 ‖f‖₂ with exact norm-squares, m in 0..6."""
    mesh = cfg.mesh()
    witness = None
    worst = Fraction(0)
    checked = 0
    for m in range(7):
        for t in range(cfg.trials):
            g = abs(generate_function(cfg.seed ^ (97 * m + t), cfg.kind, mesh))
            f = abs(generate_function((cfg.seed + 1) ^ (97 * m + t), cfg.kind,
                                      mesh))
            fam = cz_sparse(g, GridId.all_grids(1)[t % 2])
            if fam.is_empty:
                continue
            sh = split_families(fam, m)
            fsq = f.norm_l2_sq()
            for alpha in GridId.all_grids(1):
                asq = amalgam_adjoint(sh, alpha, f).norm_l2_sq()
                checked += 1
                if fsq > 0:
                    ratio = asq / fsq
                    if ratio > worst:
                        worst = ratio
                if asq > 64 * fsq and witness is None:
                    witness = {"m": m, "trial": t,
                               "norm_ratio_sq": rat_str(asq / fsq)}
    return Verdict(
        criterion="l2-bound-8",
        passed=witness is None,
        measured={"pairs_checked": checked,
                  "max_norm_ratio": math.sqrt(float(worst)),
                  "bound": 8.0},
        config=cfg, witness=witness)


def _crit_weak_growth(cfg: ExperimentConfig) -> Verdict:
    """Weak (1,1) ratio r(m) doubles by at most 3: r(2m) <= 3 r(m)."""
    mesh = cfg.mesh()
    ms = sorted(set(cfg.m_list) | set(2 * m for m in cfg.m_list))
    ratios = {}
    for m in ms:
        best = Fraction(0)
        for t in range(cfg.trials):
            f = abs(generate_function(cfg.seed ^ (31 * m + t), cfg.kind,
                                      mesh))
            l1 = f.norm_l1()
            if l1 == 0:
                continue
            fam = cz_sparse(f, GridId.all_grids(1)[t % 2])
            if fam.is_empty:
                continue
            sh = split_families(fam, m)
            for alpha in GridId.all_grids(1):
                best = max(best,
                           weak_norm(amalgam_adjoint(sh, alpha, f)) / l1)
        ratios[m] = best
    witness = None
    for m in cfg.m_list:
        if ratios[m] > 0 and ratios[2 * m] > 3 * ratios[m]:
            witness = witness or {"m": m,
                                  "r_m": float(ratios[m]),
                                  "r_2m": float(ratios[2 * m])}
    return Verdict(
        criterion="weak11-growth",
        passed=witness is None,
        measured={"r": {str(m): float(v) for m, v in ratios.items()},
                  "doubling": {str(m): float(ratios[2 * m] / ratios[m])
                               for m in cfg.m_list if ratios[m] > 0}},
        config=cfg, witness=witness)


def _crit_adjoint_oscillation(cfg: ExperimentConfig) -> Verdict:
    """Oscillation ratio ω_λ(A*f;Q)/(m·f_Q) doubles by at most 3, and the
    display |A*f - c|·χ_q <= A*(f·χ_q) holds exactly."""
    from .sparse import _atoms_in_box
    mesh = cfg.mesh()
    lam = cfg.lam
    ms = sorted(set(cfg.m_list) | set(2 * m for m in cfg.m_list))
    witness = None
    display_checked = 0

    probes = []
    for beta in GridId.all_grids(1):
        for k_q in (1, 2, 3, 4):
            for jq in range(-2, 2 ** k_q + 2):
                q = Cube(beta, k_q, (jq,))
                if list(_atoms_in_box(mesh, q.box)):
                    probes.append(q)

    ratios = {m: Fraction(0) for m in ms}
    for t in range(cfg.trials):
        kind = GENERATOR_KINDS[t % len(GENERATOR_KINDS)]
        f = abs(generate_function(cfg.seed ^ t, kind, mesh))
        fam = cz_sparse(f, GridId.standard(1))
        if fam.is_empty:
            continue
        averages = {q: average(f, q.box) for q in probes}
        for m in ms:
            sh = split_families(fam, m)
            for alpha in GridId.all_grids(1):
                adj = amalgam_adjoint(sh, alpha, f)
                for q in probes:
                    av = averages[q]
                    if av == 0:
                        continue
                    osc = local_mean_oscillation(adj, q.box, lam)
                    if osc:
                        ratios[m] = max(ratios[m], osc / (m * av))

    # exact pointwise display on a fixed slice of instances
    for t in range(min(cfg.trials, 10)):
        f = abs(generate_function(cfg.seed ^ (701 + t), cfg.kind, mesh))
        fam = cz_sparse(f, GridId.standard(1))
        if fam.is_empty:
            continue
        sh = split_families(fam, 1)
        for alpha in GridId.all_grids(1):
            adj = amalgam_adjoint(sh, alpha, f)
            pairs = list(sh.family_of(alpha))
            for jq in range(0, 4):
                q = Cube(alpha, 1, (jq,))
                atoms = list(_atoms_in_box(mesh, q.box))
                if not atoms:
                    continue
                c = sum(f.atom_sum(qb.box) / cov.measure
                        for _, qb, cov in pairs
                        if cov.box.contains_box(q.box))
                sel = set(atoms)
                fq = StepFunction(mesh,
                                  [f.values[i] if i in sel else Fraction(0)
                                   for i in range(mesh.size)])
                adj_q = amalgam_adjoint(sh, alpha, fq)
                display_checked += 1
                for i in atoms:
                    if abs(adj.values[i] - c) > adj_q.values[i]:
                        witness = witness or {
                            "trial": t, "cube": q.to_json(), "cell": i}

    for m in cfg.m_list:
        if ratios[m] > 0 and ratios[2 * m] > 3 * ratios[m]:
            witness = witness or {"m": m, "ratio_m": float(ratios[m]),
                                  "ratio_2m": float(ratios[2 * m])}
    return Verdict(
        criterion="adjoint-osc-growth",
        passed=witness is None,
        measured={"ratio": {str(m): float(v) for m, v in ratios.items()},
                  "doubling": {str(m): float(ratios[2 * m] / ratios[m])
                               for m in cfg.m_list if ratios[m] > 0},
                  "display_checks": display_checked},
        config=cfg, witness=witness)


def _crit_hilbert_exact(cfg: ExperimentConfig) -> Verdict:
    """hilbert_apply agrees with adaptive quadrature to 1e-8; truncation
    additivity to 1e-10; T-natural sublinearity to 1e-10."""
    mesh = cfg.mesh()
    rng = random.Random(cfg.seed)
    witness = None
    max_quad = 0.0
    checked = 0
    while checked < cfg.trials:
        f = generate_function(rng.randrange(10 ** 6), "random-cells", mesh)
        x = Fraction(rng.randrange(-8, 17), 8)
        eps = Fraction(rng.randrange(1, 8), 16)
        nu = eps + Fraction(rng.randrange(1, 32), 8)
        got = hilbert_apply(f, x, eps, nu)
        want = 0.0
        for i, v in enumerate(f.values):
            if v == 0:
                continue
            a = mesh.domain.lo[0] + i * mesh.h
            b = a + mesh.h
            for rlo, rhi in ((x - nu, x - eps), (x + eps, x + nu)):
                c, d = max(a, rlo), min(b, rhi)
                if c >= d:
                    continue
                val, _ = quad(lambda y, vv=float(v), xx=float(x):
                              vv / (xx - y), float(c), float(d),
                              epsabs=1e-12, epsrel=1e-12)
                want += val
        diff = abs(got - want)
        max_quad = max(max_quad, diff)
        if diff > 1e-8 and witness is None:
            witness = {"x": rat_str(x), "eps": rat_str(eps),
                       "nu": rat_str(nu), "diff": diff}
        checked += 1

    max_add = 0.0
    for t in range(40):
        f = generate_function(cfg.seed ^ (211 + t), "random-cells", mesh)
        x = Fraction(rng.randrange(-8, 17), 8)
        r = sorted(Fraction(rng.randrange(1, 64), 16) for _ in range(3))
        if r[0] == r[1] or r[1] == r[2]:
            continue
        whole = hilbert_apply(f, x, r[0], r[2])
        split = hilbert_apply(f, x, r[0], r[1]) \
            + hilbert_apply(f, x, r[1], r[2])
        diff = abs(whole - split)
        max_add = max(max_add, diff)
        if diff > 1e-10 and witness is None:
            witness = {"additivity_diff": diff, "x": rat_str(x)}

    max_sub = -1.0
    for t in range(10):
        f = generate_function(cfg.seed ^ (401 + t), "random-cells", mesh)
        g = generate_function(cfg.seed ^ (601 + t), "random-cells", mesh)
        tf, tg, tfg = maximal_truncated(f), maximal_truncated(g), \
            maximal_truncated(f + g)
        for i in range(mesh.size):
            over = float(tfg.values[i]) - float(tf.values[i]) \
                - float(tg.values[i])
            max_sub = max(max_sub, over)
            if over > 1e-10 and witness is None:
                witness = {"sublinearity_excess": over, "cell": i,
                           "trial": t}
    return Verdict(
        criterion="hilbert-exact",
        passed=witness is None,
        measured={"max_quadrature_diff": max_quad,
                  "max_additivity_diff": max_add,
                  "max_sublinearity_excess": max_sub},
        config=cfg, witness=witness)


def _crit_osc_stability(cfg: ExperimentConfig) -> Verdict:
    """The max oscillation-estimate ratio over the pair set is finite and
    moves by at most 25% under mesh refinement level -> level+2."""
    mesh = cfg.mesh()
    rng = random.Random(cfg.seed)
    witness = None
    max_coarse = max_fine = 0.0
    pairs = 0
    while pairs < cfg.trials:
        f = abs(generate_function(rng.randrange(10 ** 6), cfg.kind, mesh))
        if f.norm_l1() == 0:
            continue
        a = Fraction(rng.randrange(0, 7), 8)
        side = Fraction(1, 2 ** rng.randrange(1, 4))
        q = Box.interval(a, a + side)
        rep = oscillation_estimate_report(f, q, cfg.lam)
        rep2 = oscillation_estimate_report(f.refine(2), q, cfg.lam)
        pairs += 1
        if not (math.isfinite(rep.ratio) and math.isfinite(rep2.ratio)):
            witness = witness or {"pair": pairs, "ratio": rep.ratio,
                                  "refined": rep2.ratio}
            continue
        max_coarse = max(max_coarse, rep.ratio)
        max_fine = max(max_fine, rep2.ratio)
    rel = abs(max_fine - max_coarse) / max(max_coarse, 1e-30)
    if witness is None and rel > 0.25:
        witness = {"max_ratio_coarse": max_coarse, "max_ratio_fine": max_fine,
                   "rel_change": rel}
    return Verdict(
        criterion="osc-stability",
        passed=witness is None,
        measured={"pairs": pairs, "max_ratio_coarse": max_coarse,
                  "max_ratio_fine": max_fine, "rel_change": rel,
                  "levels": [cfg.level, cfg.level + 2]},
        config=cfg, witness=witness)


def _crit_domination(cfg: ExperimentConfig) -> Verdict:
    """dominate() passes its exact decomposition stage on every seed and
    the majorization constant varies by less than a factor 2."""
    mesh = cfg.mesh()
    witness = None
    cs = []
    for t in range(cfg.trials):
        f = generate_function(cfg.seed ^ t, cfg.kind, mesh)
        if any(v < 0 for v in f.values):
            f = abs(f)
        if f.norm_l1() == 0:
            continue
        rep = dominate(f)
        if rep.decomposition_gap < 0 or rep.violations:
            witness = witness or {"trial": t, "seed": cfg.seed ^ t,
                                  "gap": float(rep.decomposition_gap),
                                  "violations": rep.violations}
        if rep.c > 0:
            cs.append(rep.c)
    spread = max(cs) / min(cs) if cs else float("inf")
    if spread >= 2 and witness is None:
        witness = {"c_min": min(cs), "c_max": max(cs), "spread": spread}
    return Verdict(
        criterion="master-domination",
        passed=witness is None,
        measured={"instances": len(cs), "c_min": min(cs), "c_max": max(cs),
                  "spread": spread},
        config=cfg, witness=witness)


def _crit_a2_scan(cfg: ExperimentConfig) -> Verdict:
    """Power-family scan: A2 span >= 20x while opnorm/A2 stays within 10x
    for the sparse operator and the full-truncation Hilbert matrix."""
    exps = [0, 0.3, 0.6, 0.8, 0.9, 0.95]
    tables = {}
    witness = None
    measured = {}
    for kind in ("sparse", "hilbert"):
        tab = a2_scan(kind, exps, level=cfg.level, seed=cfg.seed, iters=80)
        tables[kind] = tab
        a2s = [r.a2 for r in tab.rows]
        rats = [r.ratio for r in tab.rows]
        span = max(a2s) / min(a2s)
        ratio_spread = max(rats) / min(rats)
        a0 = tab.rows[0].ratio
        measured[kind] = {"span": span, "ratio_spread": ratio_spread,
                          "a0_ratio": a0, "slope": tab.slope,
                          "rows": [r.to_json() for r in tab.rows]}
        fails = {}
        if span < 20:
            fails["span"] = span
        if ratio_spread > 10:
            fails["ratio_spread"] = ratio_spread
        if not 0.1 <= a0 <= 10:
            fails["a0_ratio"] = a0
        if fails and witness is None:
            witness = {"kind": kind, "clauses": fails}
    return Verdict(
        criterion="a2-scan",
        passed=witness is None,
        measured=measured,
        config=cfg, witness=witness)


_REGISTRY = {
    "cover-6x": (_crit_cover,
                 dict(level=4, trials=100000, seed=2024)),
    "sparse-invariants": (_crit_sparse_invariants,
                          dict(level=10, trials=100, seed=11)),
    "maximal-sandwich": (_crit_maximal_sandwich,
                         dict(level=10, trials=100, seed=23)),
    "osc-decomposition": (_crit_decomposition,
                          dict(level=10, trials=200, seed=37,
                               lam=Fraction(1, 8))),
    "l2-bound-8": (_crit_l2_bound,
                   dict(level=8, trials=100, seed=41)),
    "weak11-growth": (_crit_weak_growth,
                      dict(level=8, trials=50, seed=53, m_list=(1, 2, 4))),
    "adjoint-osc-growth": (_crit_adjoint_oscillation,
                           dict(level=7, trials=25, seed=67,
                                m_list=(1, 2, 4))),
    "hilbert-exact": (_crit_hilbert_exact,
                      dict(level=5, trials=100, seed=71)),
    "osc-stability": (_crit_osc_stability,
                      dict(level=7, trials=100, seed=83)),
    "master-domination": (_crit_domination,
                          dict(level=9, trials=50, seed=0,
                               kind="random-cells")),
    "a2-scan": (_crit_a2_scan,
                dict(level=12, trials=6, seed=7)),
}

CRITERION_IDS = list(_REGISTRY)

_ALIASES = {str(i + 1): cid for i, cid in enumerate(CRITERION_IDS)}


def default_config(criterion: str) -> ExperimentConfig:
    cid = _ALIASES.get(criterion, criterion)
    if cid not in _REGISTRY:
        raise KeyError("unknown criterion id: %r" % criterion)
    return ExperimentConfig(**_REGISTRY[cid][1])


def run_criterion(criterion: str, config: ExperimentConfig = None) -> Verdict:
    cid = _ALIASES.get(criterion, criterion)
    if cid not in _REGISTRY:
        raise KeyError("unknown criterion id: %r" % criterion)
    fn, defaults = _REGISTRY[cid]
    cfg = config if config is not None else ExperimentConfig(**defaults)
    t0 = time.time()
    verdict = fn(cfg)
    verdict.elapsed = time.time() - t0
    return verdict


def run_all(seed_override: int = None) -> list:
    out = []
    for cid in CRITERION_IDS:
        cfg = default_config(cid)
        if seed_override is not None:
            cfg = cfg.replaced(seed=seed_override)
        out.append(run_criterion(cid, cfg))
    return out
