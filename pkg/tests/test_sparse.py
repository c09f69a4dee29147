"""Tests for sparse families, the two constructions, and their operators.

Derived values are checked against independent recomputations: maximality
by walking ancestor chains, coverage against the grid maximal function,
the decomposition against its own exactly-evaluated inequality, pairings
by direct rational summation on both sides.
"""

import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from sparsedom.geometry import Box, Cube, GridId
from sparsedom.stepfn import (
    Mesh,
    StepFunction,
    average,
    dyadic_maximal,
    hl_maximal,
    local_mean_oscillation,
    median,
    sharp_maximal,
)
from sparsedom.sparse import (
    DecompositionResult,
    SparseFamily,
    amalgam,
    amalgam_adjoint,
    cz_good_bad_split,
    cz_pointwise_gap,
    cz_sparse,
    oscillation_decompose,
    scale_family_count,
    shifted_operator,
    sparse_operator,
    split_families,
    verify_decomposition,
    verify_sparse_family,
    weak_norm,
    _atoms_in_box,
)

STD = GridId.standard(1)
SHIFTED = GridId.shifted(1)


def mk_random(mesh, seed, lo=0, hi=8, support=None):
    rng = random.Random(seed)
    vals = []
    for i in range(mesh.size):
        if support is not None:
            idx = mesh.unflat(i)
            center = tuple(mesh.domain.lo[d] + (idx[d] + Fraction(1, 2)) * mesh.h
                           for d in range(mesh.dim))
            if not support.contains_point(center):
                vals.append(Fraction(0))
                continue
        vals.append(Fraction(rng.randrange(lo, hi + 1)))
    return StepFunction(mesh, vals)


def pairing(u, v):
    h = u.mesh.h
    return h**u.mesh.dim * sum(a * b for a, b in zip(u.values, v.values))


# ---------------------------------------------------------------------------
# cz_sparse
# ---------------------------------------------------------------------------

def test_cz_sparse_indicator_ancestor_chain():
    # f = chi_[0,1/2): thresholds 4^k for k=-3,-2,-1 pick the ancestors
    # [0,16), [0,4), [0,1); averages 1/32, 1/8, 1/2.
    mesh = Mesh(dim=1, level=4)
    f = StepFunction.indicator(mesh, Box.interval(0, Fraction(1, 2)))
    fam = cz_sparse(f, STD)
    assert fam.level_keys() == [-3, -2, -1]
    expect = {
        -3: (Fraction(0), Fraction(16), Fraction(1, 32)),
        -2: (Fraction(0), Fraction(4), Fraction(1, 8)),
        -1: (Fraction(0), Fraction(1), Fraction(1, 2)),
    }
    for k, (corner, side, avg) in expect.items():
        (q,) = fam.levels[k]
        assert q.corner[0] == corner and q.side == side
        assert average(f, q.box) == avg
        assert avg > Fraction(4)**k              # selected above threshold
    verify_sparse_family(fam)
    assert cz_pointwise_gap(f, fam, dyadic_maximal(f, STD)) >= 0


def test_cz_sparse_zero_function_empty():
    mesh = Mesh(dim=1, level=3)
    fam = cz_sparse(StepFunction.zeros(mesh), STD)
    assert fam.is_empty


def _assert_cz_postconditions(f, grid, fam):
    """Independent recheck: selection above threshold, maximality along the
    full ancestor chain, coverage of the maximal-function level set."""
    n = f.mesh.dim
    g = abs(f)
    l1 = g.norm_l1()
    for k in fam.level_keys():
        t = Fraction(2)**((n + 1) * k)
        for q in fam.levels[k]:
            assert average(g, q.box) > t
            anc = q.parent()
            while anc.measure * t <= 4 * l1:
                assert average(g, anc.box) <= t
                anc = anc.parent()
    mf = dyadic_maximal(f, grid)
    mesh = f.mesh
    for k in fam.level_keys():
        t = Fraction(2)**((n + 1) * k)
        covered = set()
        for q in fam.levels[k]:
            covered.update(_atoms_in_box(mesh, q.box))
        for i in range(mesh.size):
            if mf.values[i] > t:
                assert i in covered


def test_cz_sparse_postconditions_both_grids():
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 7)
    for grid in (STD, SHIFTED):
        fam = cz_sparse(f, grid)
        verify_sparse_family(fam)
        _assert_cz_postconditions(f, grid, fam)
        assert cz_pointwise_gap(f, fam, dyadic_maximal(f, grid)) >= 0


def test_cz_sparse_postconditions_2d():
    mesh = Mesh(dim=2, level=3)
    f = mk_random(mesh, 3, hi=5)
    for grid in GridId.all_grids(2):
        fam = cz_sparse(f, grid)
        verify_sparse_family(fam)
        assert cz_pointwise_gap(f, fam, dyadic_maximal(f, grid)) >= 0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10**6), st.booleans())
def test_cz_sparse_invariants_random(seed, shifted):
    mesh = Mesh(dim=1, level=4)
    rng = random.Random(seed)
    vals = [Fraction(rng.randrange(0, 9)) if rng.random() < 0.7 else Fraction(0)
            for _ in range(mesh.size)]
    f = StepFunction(mesh, vals)
    grid = SHIFTED if shifted else STD
    fam = cz_sparse(f, grid)
    if fam.is_empty:
        assert all(v == 0 for v in vals)
        return
    verify_sparse_family(fam)
    assert cz_pointwise_gap(f, fam, dyadic_maximal(f, grid)) >= 0


# ---------------------------------------------------------------------------
# oscillation decomposition
# ---------------------------------------------------------------------------

def test_decompose_constant_empty():
    mesh = Mesh(dim=1, level=4)
    f = StepFunction.constant(mesh, Fraction(5, 3))
    res = oscillation_decompose(f, Cube(STD, 0, (0,)))
    assert res.family.is_empty
    assert res.base_median == Fraction(5, 3)
    assert verify_decomposition(f, res) >= 0
    sharp = sharp_maximal(f, res.cube, res.lam)
    assert all(sharp.values[i] == 0 for i in _atoms_in_box(mesh, res.cube.box))


def test_decompose_half_indicator():
    # f = chi_[0,1/2) on q0 = [0,1): maximal median 1, empty family, and the
    # bound holds through 4*M^# alone since omega_{1/8}(f;q0) = 1/2.
    mesh = Mesh(dim=1, level=4)
    f = StepFunction.indicator(mesh, Box.interval(0, Fraction(1, 2)))
    q0 = Cube(STD, 0, (0,))
    assert local_mean_oscillation(f, q0.box, Fraction(1, 8)) == Fraction(1, 2)
    res = oscillation_decompose(f, q0)
    assert res.base_median == 1
    assert res.family.is_empty
    sharp = sharp_maximal(f, q0, res.lam)
    for i in _atoms_in_box(mesh, q0.box):
        assert sharp.values[i] == Fraction(1, 2)
    assert verify_decomposition(f, res) == 1  # RHS-LHS minimized on [1/2,1)


def test_decompose_random_exact_bound():
    mesh = Mesh(dim=1, level=5)
    q0 = Cube(STD, 0, (0,))
    for seed in range(12):
        rng = random.Random(seed)
        f = StepFunction(mesh, [Fraction(rng.randrange(-8, 9))
                                for _ in range(mesh.size)])
        res = oscillation_decompose(f, q0)
        verify_sparse_family(res.family)
        for k, q in res.family.pairs():
            assert q0.box.contains_box(q.box)
            assert q.grid == STD
            assert res.coefficients[q] == local_mean_oscillation(
                f, q.box, res.lam)
        assert verify_decomposition(f, res) >= 0


def test_decompose_random_exact_bound_2d():
    mesh = Mesh(dim=2, level=3)
    q0 = Cube(GridId.standard(2), 0, (0, 0))
    for seed in range(4):
        rng = random.Random(100 + seed)
        f = StepFunction(mesh, [Fraction(rng.randrange(-6, 7))
                                for _ in range(mesh.size)])
        res = oscillation_decompose(f, q0)
        verify_sparse_family(res.family)
        assert verify_decomposition(f, res) >= 0


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10**6))
def test_decompose_property(seed):
    mesh = Mesh(dim=1, level=4)
    rng = random.Random(seed)
    f = StepFunction(mesh, [Fraction(rng.randrange(-4, 5), rng.randrange(1, 4))
                            for _ in range(mesh.size)])
    res = oscillation_decompose(f, Cube(STD, 0, (0,)))
    verify_sparse_family(res.family)
    assert verify_decomposition(f, res) >= 0


# ---------------------------------------------------------------------------
# sparse_operator / shifted_operator
# ---------------------------------------------------------------------------

def test_sparse_operator_single_cube():
    mesh = Mesh(dim=1, level=4)
    f = mk_random(mesh, 1)
    q = Cube(STD, 1, (0,))
    fam = SparseFamily(STD, {0: [q]})
    out = sparse_operator(fam, f)
    fq = average(f, q.box)
    for i in range(mesh.size):
        inside = i in set(_atoms_in_box(mesh, q.box))
        assert out.values[i] == (fq if inside else 0)


def test_sparse_operator_nested_count():
    mesh = Mesh(dim=1, level=4)
    one = StepFunction.constant(mesh, 1)
    fam = SparseFamily(STD, {0: [Cube(STD, 0, (0,))],
                             1: [Cube(STD, 1, (0,))],
                             2: [Cube(STD, 2, (0,))]})
    verify_sparse_family(fam)
    out = sparse_operator(fam, one)
    x = mesh.flat(mesh.cell_of_point((Fraction(1, 8),)))
    assert out.values[x] == 3


def test_sparse_operator_rejects_negative():
    mesh = Mesh(dim=1, level=3)
    f = StepFunction.constant(mesh, -1)
    fam = SparseFamily(STD, {0: [Cube(STD, 0, (0,))]})
    with pytest.raises(ValueError):
        sparse_operator(fam, f)
    with pytest.raises(ValueError):
        shifted_operator(fam, 1, f)


def test_cz_composition_domination():
    # M^{grid} f <= 2^{n+1} A_{grid,S} f pointwise on the cz family
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 5)
    for grid in (STD, SHIFTED):
        fam = cz_sparse(f, grid)
        af = sparse_operator(fam, f)
        mf = dyadic_maximal(f, grid)
        assert all(mf.values[i] <= 4 * af.values[i] for i in range(mesh.size))


def test_shifted_operator_single_cube_dilate():
    # q = [1/2,1), m=1, f = chi_[0,1/2): average over [1/4,5/4) is 1/4
    mesh = Mesh(dim=1, level=5)
    f = StepFunction.indicator(mesh, Box.interval(0, Fraction(1, 2)))
    q = Cube(STD, 1, (1,))
    fam = SparseFamily(STD, {0: [q]})
    out = shifted_operator(fam, 1, f)
    inside = set(_atoms_in_box(mesh, q.box))
    for i in range(mesh.size):
        assert out.values[i] == (Fraction(1, 4) if i in inside else 0)


def test_shifted_operator_m0_matches_sparse_operator():
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 9)
    fam = cz_sparse(f, STD)
    assert shifted_operator(fam, 0, f).values == sparse_operator(fam, f).values


# ---------------------------------------------------------------------------
# split_families and amalgams
# ---------------------------------------------------------------------------

def test_split_families_cover_bounds():
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 13)
    fam = cz_sparse(f, STD)
    for m in (0, 1, 2):
        sh = split_families(fam, m)
        total = 0
        for alpha in GridId.all_grids(1):
            members = list(sh.family_of(alpha))
            total += len(members)
            for _, q, cover in members:
                assert cover.grid == alpha
                assert cover.box.contains_box(Box(
                    tuple(c - (2**m - 1) * q.side / 2 for c in q.corner),
                    tuple(c + (2**m + 1) * q.side / 2 for c in q.corner)))
                assert cover.side <= 6 * 2**m * q.side
        assert total == fam.cube_count()  # the two families partition S


def test_amalgam_single_pair_and_empty():
    mesh = Mesh(dim=1, level=4)
    f = mk_random(mesh, 21)
    q = Cube(STD, 2, (1,))
    fam = SparseFamily(STD, {0: [q]})
    sh = split_families(fam, 0)
    (grid, cover), = [sh.assignment[q]]
    other = SHIFTED if grid == STD else STD
    assert all(v == 0 for v in amalgam(sh, other, f).values)
    out = amalgam(sh, grid, f)
    val = f.atom_sum(cover.box) / cover.measure
    inside = set(_atoms_in_box(mesh, q.box))
    for i in range(mesh.size):
        assert out.values[i] == (val if i in inside else 0)
    adj = amalgam_adjoint(sh, grid, f)
    val2 = f.atom_sum(q.box) / cover.measure
    inside2 = set(_atoms_in_box(mesh, cover.box))
    for i in range(mesh.size):
        assert adj.values[i] == (val2 if i in inside2 else 0)


def test_amalgam_duality_exact():
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 31)
    g = mk_random(mesh, 32)
    fam = cz_sparse(f, STD)
    for m in (0, 1, 3):
        sh = split_families(fam, m)
        for alpha in GridId.all_grids(1):
            assert pairing(amalgam(sh, alpha, f), g) == \
                pairing(f, amalgam_adjoint(sh, alpha, g))


def test_majorization_by_amalgams():
    # T_{S,m} f <= 6^n sum_alpha A_{m,alpha} f cell-by-cell, exact
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 41)
    fam = cz_sparse(f, STD)
    for m in (0, 1, 2):
        sh = split_families(fam, m)
        tm = shifted_operator(fam, m, f)
        tot = StepFunction.zeros(mesh)
        for alpha in GridId.all_grids(1):
            tot = tot + amalgam(sh, alpha, f)
        assert all(tm.values[i] <= 6 * tot.values[i] for i in range(mesh.size))


def test_amalgam_l2_bound_8():
    mesh = Mesh(dim=1, level=6)
    fam_src = mk_random(mesh, 55)
    fam = cz_sparse(fam_src, STD)
    for m in (0, 2):
        sh = split_families(fam, m)
        for f_seed in (56, 57):
            f = mk_random(mesh, f_seed)
            nf = f.norm_l2_sq()
            for alpha in GridId.all_grids(1):
                assert amalgam(sh, alpha, f).norm_l2_sq() <= 64 * nf
                assert amalgam_adjoint(sh, alpha, f).norm_l2_sq() <= 64 * nf


def test_adjoint_weak_type_doubling():
    mesh = Mesh(dim=1, level=6)
    f = mk_random(mesh, 61)
    fam = cz_sparse(f, STD)
    l1 = f.norm_l1()
    r = {}
    for m in (1, 2, 4, 8):
        sh = split_families(fam, m)
        r[m] = max(weak_norm(amalgam_adjoint(sh, alpha, f)) / l1
                   for alpha in GridId.all_grids(1))
    for m in (1, 2, 4):
        assert r[2 * m] <= 3 * r[m]


def test_adjoint_oscillation_display_exact():
    # |A* f - c| chi_q <= A*(f chi_q) for grid cubes q of the cover grid,
    # with c the sum of the coefficients of covers containing q.
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 71)
    fam = cz_sparse(f, STD)
    sh = split_families(fam, 1)
    for alpha in GridId.all_grids(1):
        adj = amalgam_adjoint(sh, alpha, f)
        pairs = list(sh.family_of(alpha))
        for k_q in (0, 1, 2):
            for jq in range(-4, 10):
                q = Cube(alpha, k_q, (jq,))
                atoms = list(_atoms_in_box(mesh, q.box))
                if not atoms:
                    continue
                c = sum(f.atom_sum(qb.box) / cov.measure
                        for _, qb, cov in pairs
                        if cov.box.contains_box(q.box))
                sel = set(atoms)
                fq = StepFunction(mesh, [f.values[i] if i in sel else Fraction(0)
                                         for i in range(mesh.size)])
                adj_q = amalgam_adjoint(sh, alpha, fq)
                for i in atoms:
                    assert abs(adj.values[i] - c) <= adj_q.values[i]


def test_adjoint_oscillation_doubling():
    mesh = Mesh(dim=1, level=6)
    f = mk_random(mesh, 81)
    fam = cz_sparse(f, STD)
    lam = Fraction(1, 8)

    def ratio(m, alpha):
        sh = split_families(fam, m)
        adj = amalgam_adjoint(sh, alpha, f)
        best = Fraction(0)
        for k_q in (1, 2, 3):
            for jq in range(-2, 2**k_q * 3):
                q = Cube(alpha, k_q, (jq,))
                if not list(_atoms_in_box(mesh, q.box)):
                    continue
                av = average(f, q.box)
                if av == 0:
                    continue
                best = max(best, local_mean_oscillation(adj, q.box, lam) / av)
        return best

    for alpha in GridId.all_grids(1):
        r1, r2 = ratio(1, alpha), ratio(2, alpha)
        if r1 > 0:
            assert r2 <= 3 * r1


# ---------------------------------------------------------------------------
# good/bad split and scale counting
# ---------------------------------------------------------------------------

def test_good_bad_split_identities():
    mesh = Mesh(dim=1, level=5)
    f = mk_random(mesh, 11, support=Box.interval(0, Fraction(1, 2)))
    beta = Fraction(4)
    res = cz_good_bad_split(f, beta)
    assert res.bad_parts, "level set should be nonempty for this input"
    total_bad = StepFunction.zeros(mesh)
    for q, b in res.bad_parts:
        assert b.integral() == 0
        assert average(f, q.box) == average(res.good, q.box)
        total_bad = total_bad + b
    assert (res.good + total_bad).values == f.values
    assert res.good.norm_l1() <= f.norm_l1()
    assert sum(b.norm_l1() for _, b in res.bad_parts) <= 2 * f.norm_l1()
    mf = hl_maximal(f)
    for i in range(mesh.size):
        if mf.values[i] <= beta:
            assert res.good.values[i] == f.values[i]
        else:
            assert res.good.values[i] <= res.constant * beta


def test_good_bad_split_trivial_and_errors():
    mesh = Mesh(dim=1, level=4)
    f = mk_random(mesh, 12, support=Box.interval(0, 1))
    res = cz_good_bad_split(f, Fraction(1000))
    assert res.bad_parts == [] and res.good.values == f.values
    with pytest.raises(ValueError):
        cz_good_bad_split(f, Fraction(0))
    dense = StepFunction.constant(mesh, 5)
    with pytest.raises(ValueError):
        cz_good_bad_split(dense, Fraction(1, 100))  # level set = whole domain


def test_scale_family_count_bounds():
    mesh = Mesh(dim=1, level=6)
    f = mk_random(mesh, 17)
    fam = cz_sparse(f, STD)
    for m in (0, 1, 2):
        sh = split_families(fam, m)
        for k_q in (0, 1):
            for jq in range(2**k_q):
                q_l = Cube(STD, k_q, (jq,))
                count = scale_family_count(sh, q_l)
                assert count <= m + 5
                side_lim = q_l.side / (18 * 2**m)
                members = {q for _, q in fam.pairs()
                           if q_l.box.contains_box(q.box) and q.side >= side_lim}
                # overlap of the deduplicated sub-collection <= count
                for i in _atoms_in_box(mesh, q_l.box):
                    center = (mesh.domain.lo[0] + (i + Fraction(1, 2)) * mesh.h,)
                    overlap = sum(1 for q in members if q.box.contains_point(center))
                    assert overlap <= count


def test_scale_family_count_empty():
    mesh = Mesh(dim=1, level=4)
    f = StepFunction.indicator(mesh, Box.interval(0, Fraction(1, 16)))
    fam = cz_sparse(f, STD)
    sh = split_families(fam, 0)
    # a cube far away from the support holds no family cubes
    assert scale_family_count(sh, Cube(STD, 2, (-4,))) == 0


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

def test_family_json_roundtrip():
    mesh = Mesh(dim=1, level=4)
    f = mk_random(mesh, 19)
    fam = cz_sparse(f, STD)
    blob = json.dumps(fam.to_json())
    back = SparseFamily.from_json(json.loads(blob))
    assert back.grid == fam.grid
    assert back.levels == fam.levels


def test_decomposition_json():
    mesh = Mesh(dim=1, level=4)
    f = mk_random(mesh, 23, lo=-5, hi=5)
    res = oscillation_decompose(f, Cube(STD, 0, (0,)))
    data = res.to_json()
    assert data["median"] == "%d/%d" % (res.base_median.numerator,
                                        res.base_median.denominator)
    assert len(data["coefficients"]) == res.family.cube_count()
