"""Acceptance suite: one test per pinned criterion configuration.

Each test runs the registered criterion at its default (pinned) config,
prints one PASS/FAIL line with the measured quantities, and asserts the
criterion's clauses at their stated tolerances.  Budgeted runtimes are
asserted where the criterion pins one.
"""

import sys

from sparsedom.harness import default_config, run_criterion

# collected lines; conftest replays them after capture is released so the
# per-criterion verdicts survive pytest's default output capturing
CRITERION_LINES = []


def _line(index: int, verdict, detail: str) -> None:
    text = "%s  criterion %2d %-20s %6.1fs  %s" % (
        "PASS" if verdict.passed else "FAIL", index, verdict.criterion,
        verdict.elapsed, detail)
    CRITERION_LINES.append(text)
    print(text)
    print(text, file=sys.stderr)


def test_criterion_01_cover_6x():
    v = run_criterion("cover-6x")
    m = v.measured
    _line(1, v, "max_side_ratio=%.6f over %d+%d boxes"
          % (m["max_side_ratio"], m["trials_1d"], m["trials_2d"]))
    assert m["trials_1d"] == 100000 and m["trials_2d"] == 10000
    assert v.passed, v.witness
    assert m["max_side_ratio"] <= 6.0
    assert v.elapsed < 10.0


def test_criterion_02_sparse_invariants():
    v = run_criterion("sparse-invariants")
    m = v.measured
    _line(2, v, "families=%d min_pointwise_gap=%s"
          % (m["families_checked"], m["min_pointwise_gap"]))
    assert v.passed, v.witness
    assert m["min_pointwise_gap"] >= 0
    assert v.elapsed < 60.0


def test_criterion_03_maximal_sandwich():
    v = run_criterion("maximal-sandwich")
    m = v.measured
    _line(3, v, "min_grid_gap=%.4f min_sparse_gap=%.4f"
          % (m["min_grid_gap"], m["min_sparse_gap"]))
    assert v.passed, v.witness
    assert m["min_grid_gap"] >= 0 and m["min_sparse_gap"] >= 0


def test_criterion_04_oscillation_decomposition():
    v = run_criterion("osc-decomposition")
    m = v.measured
    _line(4, v, "min_gap=%s mean_family=%.2f lambda=%s"
          % (m["min_gap"], m["mean_family_size"], m["lambda"]))
    assert v.passed, v.witness
    assert m["min_gap"] >= 0 and m["lambda"] == "1/8"
    assert v.elapsed < 300.0


def test_criterion_05_l2_bound_8():
    v = run_criterion("l2-bound-8")
    m = v.measured
    _line(5, v, "pairs=%d max_norm_ratio=%.4f"
          % (m["pairs_checked"], m["max_norm_ratio"]))
    assert v.passed, v.witness
    assert m["max_norm_ratio"] <= 8.0


def test_criterion_06_weak_l1_growth():
    v = run_criterion("weak11-growth")
    m = v.measured
    _line(6, v, "doubling=%s"
          % {k: round(x, 3) for k, x in m["doubling"].items()})
    assert v.passed, v.witness
    for mm in ("1", "2", "4"):
        assert m["doubling"][mm] <= 3.0


def test_criterion_07_adjoint_oscillation_growth():
    v = run_criterion("adjoint-osc-growth")
    m = v.measured
    _line(7, v, "ratios=%s display_checks=%d"
          % ({k: round(x, 4) for k, x in m["ratio"].items()},
             m["display_checks"]))
    assert v.passed, v.witness
    for mm, ratio in m["doubling"].items():
        assert ratio <= 3.0, mm
    assert m["display_checks"] > 0
    assert m["ratio"]["1"] > 0  # the growth measurement is not vacuous


def test_criterion_08_hilbert_exactness():
    v = run_criterion("hilbert-exact")
    m = v.measured
    _line(8, v, "quad=%.2e add=%.2e sub=%.2e"
          % (m["max_quadrature_diff"], m["max_additivity_diff"],
             m["max_sublinearity_excess"]))
    assert v.passed, v.witness
    assert m["max_quadrature_diff"] <= 1e-8
    assert m["max_additivity_diff"] <= 1e-10
    assert m["max_sublinearity_excess"] <= 1e-10


def test_criterion_09_oscillation_stability():
    v = run_criterion("osc-stability")
    m = v.measured
    _line(9, v, "max_ratio %.4f -> %.4f rel_change=%.4f"
          % (m["max_ratio_coarse"], m["max_ratio_fine"], m["rel_change"]))
    assert v.passed, v.witness
    assert m["pairs"] == 100
    assert m["rel_change"] <= 0.25


def test_criterion_10_master_domination():
    cfg = default_config("master-domination")
    assert cfg.level == 9
    v = run_criterion("master-domination", cfg)
    m = v.measured
    _line(10, v, "c in [%.3f, %.3f] spread=%.3f over %d instances"
          % (m["c_min"], m["c_max"], m["spread"], m["instances"]))
    assert v.passed, v.witness
    assert m["spread"] < 2.0
    assert v.elapsed < 600.0


def test_criterion_11_a2_scan():
    v = run_criterion("a2-scan")
    detail = " ".join(
        "%s[span=%.3f ratio_spread=%.3f a0=%.3f]"
        % (kind, m["span"], m["ratio_spread"], m["a0_ratio"])
        for kind, m in v.measured.items())
    _line(11, v, detail)
    assert v.elapsed < 900.0
    for kind in ("sparse", "hilbert"):
        m = v.measured[kind]
        assert m["ratio_spread"] <= 10.0, kind
        assert 0.1 <= m["a0_ratio"] <= 10.0, kind
        # cell-center sampling cannot hold the |x-c|^{-a} mass of the
        # extreme exponents at this mesh, so the attainable span stays
        # near 6.5x; the clause below states the target faithfully and
        # is expected to fail until a finer-than-cell quadrature exists
        assert m["span"] >= 20.0, (
            "%s span %.3f < 20: desk-scale A2 search tops out near "
            "6.5x at level 12" % (kind, m["span"]))
    assert v.passed, v.witness
