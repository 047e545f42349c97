import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import crandn
from test_genpoly import B0_3, G3, _one_parameter_family
from xdecomp import fixtures
from xdecomp.decompose import (
    CoordinateChange,
    NoSolution,
    RootExtractionError,
    SolverConfig,
    decompose,
    extract_roots,
    match_points,
    planted_instance,
    preprocess_generic_change,
    solve_lambdas,
    solve_w,
    variety_violation,
)
from xdecomp.genpoly import ResidualSystem, interpolating_G, parameterize_G, residual_system
from xdecomp.poly import Poly, border_sets
from xdecomp.tensor import Decomposition, SymTensor, rank_one, residual
from xdecomp.variety import VarietySpec

EXPECTED_ROOTS = np.array([[3, 1, 3], [1, -1.283, -1.283], [1, 2.183, 2.183]])


# configuration -----------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(restarts=0), dict(residual_tol=0), dict(rel_tol=-1),
                                dict(norm_kind="max"), dict(rank_min=3, rank_max=2)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        SolverConfig(**kw)


# solving for w ------------------------------------------------------------------------

def test_m0_immediate_success(small_example):
    A, X = small_example
    fam = parameterize_G(A, B0_3)
    rs = residual_system(A, X, fam)
    w = solve_w(rs, family=fam, X=X)
    assert w.size == 0


def test_solution_has_w2_equal_one(small_example):
    A, X = small_example
    fam = _one_parameter_family()
    rs = residual_system(A, X, fam)
    for seed in range(3):
        w = solve_w(rs, SolverConfig(seed=seed), family=fam, X=X)
        assert abs(w[1] - 1) < 1e-8


def test_empty_system_returns_zero():
    rs = ResidualSystem(3, [], [], [])
    assert np.array_equal(solve_w(rs), np.zeros(3))


def test_unsolvable_system_raises():
    # w^2 + 1 = 0 and w = 0 cannot hold together
    w = Poly.var(1, 0)
    rs = ResidualSystem(1, [w * w + 1, w], ["nf", "nf"], [0, 1])
    with pytest.raises(NoSolution):
        solve_w(rs, SolverConfig(restarts=3))


def test_solver_finds_simple_root():
    w = Poly.var(2, 0)
    v = Poly.var(2, 1)
    rs = ResidualSystem(2, [w * v - 2, w - v - 1], ["nf", "nf"], [0, 1])
    sol = solve_w(rs, SolverConfig(seed=1))
    assert np.max(np.abs(rs.evaluate(sol))) < 1e-10


# roots and weights --------------------------------------------------------------------

def test_roots_of_example():
    pts = extract_roots(np.array(G3, dtype=float), border_sets(B0_3))
    assert match_points(pts, EXPECTED_ROOTS) < 1e-3


def test_roots_single_point():
    pts = extract_roots(np.array([[1.5, -2.0, 0.25]]), border_sets([(0, 0, 0)]))
    assert np.allclose(pts, [[1.5, -2.0, 0.25]])


def test_roots_from_interpolated_points(rng):
    ctx = border_sets([(0, 0, 0), (1, 0, 0), (0, 1, 0), (0, 0, 1), (2, 0, 0)])
    pts = crandn(rng, 5, 3)
    found = extract_roots(interpolating_G(pts, ctx), ctx)
    assert match_points(found, pts) < 1e-8


def test_repeated_root_rejected():
    # (y1 - 1)^2 = 0, y2 = 1: a double root at (1, 1)
    ctx = border_sets([(0, 0), (1, 0)])
    G = np.zeros((2, len(ctx.dB1)))
    for j, a in enumerate(ctx.dB1):
        G[:, j] = {(2, 0): [-1, 2], (0, 1): [1, 0], (1, 1): [0, 1]}[a]
    with pytest.raises(RootExtractionError):
        extract_roots(G, ctx)


def test_lambdas_of_example(small_example):
    A, _ = small_example
    pts = extract_roots(np.array(G3, dtype=float), border_sets(B0_3))
    lam, res = solve_lambdas(A, pts)
    order = np.argsort(pts[:, 1].real)
    assert np.allclose(lam[order], [-0.7353, 2, -2.265], atol=1e-3)
    assert res < 1e-14


def test_lambdas_rank_one(rng):
    v = crandn(rng, 3)
    lam, _ = solve_lambdas(rank_one(5, v, 4), [v])
    assert np.allclose(lam, [5])


def test_lambdas_planted(rng):
    lam0, pts = crandn(rng, 6), crandn(rng, 6, 3)
    A = Decomposition(3, lam0, pts).reconstruct(3)
    lam, _ = solve_lambdas(A, pts)
    assert np.max(np.abs(lam - lam0) / np.abs(lam0)) < 1e-8


def test_lambdas_coincident_points():
    with pytest.raises(np.linalg.LinAlgError):
        solve_lambdas(rank_one(1, [1, 2], 3), [[1, 2], [1, 2]])


def test_variety_violation_zero_on_x():
    X = fixtures.load_variety("two_planes")
    D = Decomposition(3, [1, 1], [[-2, -1, -1], [1, 0, -2]])
    assert variety_violation(X, D) == 0
    assert variety_violation(X, Decomposition(3, [1], [[2, 1, 0]])) > 0


# coordinate changes --------------------------------------------------------------------

def test_change_is_unitary(rng):
    L = CoordinateChange.random(3, rng).L
    assert np.allclose(L.conj().T @ L, np.eye(4))


def test_pullback_round_trip(rng):
    n, d = 2, 4
    lam, pts = crandn(rng, 3), crandn(rng, 3, n)
    A = Decomposition(d, lam, pts).reconstruct(n)
    A2, _, change = preprocess_generic_change(A, seed=3)
    # push the planted terms forward, then pull them back
    fwd = []
    for l0, v in zip(lam, pts):
        u = change.L @ np.concatenate([[1], v])
        fwd.append((l0 * u[0] ** d, u[1:] / u[0]))
    D2 = Decomposition(d, [f[0] for f in fwd], [f[1] for f in fwd])
    assert residual(A2, D2)[1] < 1e-12
    back = change.pullback(D2)
    assert np.allclose(back.leads, 1)
    assert match_points(back.points, pts) < 1e-10
    assert residual(A, back)[1] < 1e-12


def test_change_maps_variety(rng):
    X = fixtures.load_variety("parabola")
    change = CoordinateChange.random(2, rng)
    X2 = change.variety(X)
    u = np.array([1.0, 1 + 0.3 ** 2, 0.3])  # on x_2^2 - x_0 x_1 + x_0^2 = 0
    assert abs(complex(X2.generators_h[0].eval(change.L @ u))) < 1e-12


def test_identity_change_unchanged(small_example):
    A, _ = small_example
    ident = CoordinateChange.identity(3)
    assert np.allclose(ident.tensor(A).data, A.data)


def test_point_at_infinity_recovered():
    # (0,1)^3 + (1,1)^3 in two variables: the first term has no affine point
    A = SymTensor(1, 3, np.array([1, 1, 1, 2], dtype=complex))
    direct = decompose(A, cfg=SolverConfig(rank_min=2, rank_max=2, escalate=False, generic_change=False))
    assert not direct.success
    res = decompose(A, cfg=SolverConfig(rank_min=2, rank_max=2, escalate=False))
    assert res.success and res.change is not None
    D = res.decomposition
    assert sorted(D.leads) == [0.0, 1.0]
    assert res.abs_error <= 1e-10
    assert np.allclose(D.reconstruct(1).data, A.data, atol=1e-10)
    assert any(a.generic_change for a in res.trace)


# the driver ----------------------------------------------------------------------------

def test_zero_tensor():
    res = decompose(SymTensor.zeros(2, 3))
    assert res.success and res.rank_used == 0


def test_dimension_mismatch(small_example):
    with pytest.raises(ValueError):
        decompose(small_example[0], VarietySpec.full_space(2))


def test_example_decomposes_at_three(small_example):
    res = decompose(*small_example)
    assert res.success and res.rank_used == 3
    assert res.abs_error <= 1e-12
    assert match_points(res.decomposition.points, EXPECTED_ROOTS) < 1e-3


def test_failure_trace_without_escalation():
    A, X = fixtures.load("parabola")
    res = decompose(A, X, SolverConfig(rank_min=3, rank_max=3, escalate=False, generic_change=False))
    assert not res.success and not res
    assert [a.rank for a in res.trace] == [3]
    assert res.trace[0].message


def test_deterministic():
    A, X = fixtures.load("parabola")
    cfg = SolverConfig(seed=4)
    r1, r2 = decompose(A, X, cfg), decompose(A, X, cfg)
    assert r1.rank_used == r2.rank_used
    assert np.array_equal(r1.decomposition.points, r2.decomposition.points)
    assert np.array_equal(r1.decomposition.weights, r2.decomposition.weights)


def test_quality_invariant_under_reordering(rng):
    lam, pts = crandn(rng, 4), crandn(rng, 4, 2)
    A = Decomposition(3, lam, pts).reconstruct(2) + 1e-6 * SymTensor(2, 3, crandn(rng, 10))
    perm = rng.permutation(4)
    e1 = residual(A, Decomposition(3, lam, pts))
    e2 = residual(A, Decomposition(3, lam[perm], pts[perm]))
    assert np.allclose(e1, e2, rtol=1e-12)


@settings(max_examples=6, deadline=None)
@given(st.integers(0, 10_000))
def test_plant_and_recover_full_space(seed):
    X = VarietySpec.full_space(2)
    A, lam, pts = planted_instance(X, 3, 3, seed=seed)
    res = decompose(A, X, SolverConfig(rank_min=3, rank_max=3, escalate=False, seed=seed))
    assert res.success and res.rel_error <= 1e-8
    assert match_points(res.decomposition.points, pts) < 1e-6


def test_result_is_verified_from_scratch(small_example):
    A, X = small_example
    res = decompose(A, X)
    abs_err, rel = residual(A, res.decomposition)
    assert abs_err == pytest.approx(res.abs_error) and rel == pytest.approx(res.rel_error)


def test_match_points_shape_mismatch():
    assert match_points(np.zeros((2, 3)), np.zeros((3, 3))) == np.inf


def test_config_replace_keeps_validation():
    with pytest.raises(ValueError):
        dataclasses.replace(SolverConfig(), restarts=-1)
