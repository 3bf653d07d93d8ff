import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from er_outliers.experiments.checks import random_tridiagonal, solve_boundary_vector
from er_outliers.graph_core import generate_er, regular_tree
from er_outliers.pruning import prune
from er_outliers.transfer import (
    boundary_vector, component_ratio, condition_ok, degree_for_location, delocalization_bound,
    growth_rate_floor, ideal_top_coefficients, ideal_tridiagonal, outlier_location, perturbation_size,
    solve_omega, transfer_contraction, transfer_matrix, transfer_step, tridiag_comparison,
    tridiag_error_scale, window_params,
)


def _jacobi(diag, off):
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


def test_location_values():
    assert outlier_location(2.0) == 2.0
    assert math.isclose(outlier_location(4.0), 4 / math.sqrt(3), rel_tol=1e-15)
    with pytest.raises(ValueError):
        outlier_location(1.0, allow_below_two=True)
    with pytest.raises(ValueError):
        outlier_location(1.5)
    assert math.isclose(outlier_location(1.5, allow_below_two=True), 1.5 / math.sqrt(0.5))


@pytest.mark.parametrize("t", [2.5, 3.0, 10.0])
def test_location_inverse_pair(t):
    assert math.isclose(degree_for_location(outlier_location(t)), t, rel_tol=1e-12)


def test_inverse_values():
    assert degree_for_location(2.0) == 2.0
    assert degree_for_location(2.5) == 5.0
    assert math.isclose(outlier_location(degree_for_location(3.0)), 3.0, rel_tol=1e-12)
    with pytest.raises(ValueError):
        degree_for_location(1.9)


@given(st.floats(2.0, 50.0), st.floats(2.0, 50.0))
def test_location_increasing(a, b):
    if a < b:
        assert outlier_location(a) <= outlier_location(b)


def test_contraction_values():
    assert transfer_contraction(2.5) == 0.5
    assert transfer_contraction(-2.5) == -0.5
    assert math.isclose(transfer_contraction(outlier_location(5.0)), 0.5, rel_tol=1e-12)
    with pytest.raises(ValueError):
        transfer_contraction(2.0)


@given(st.floats(2.01, 40.0), st.booleans())
def test_contraction_is_eigenvalue_of_transfer_matrix(eta, neg):
    eta = -eta if neg else eta
    g = transfer_contraction(eta)
    assert abs(g) < 1
    T = transfer_matrix(eta)
    assert np.allclose(T @ np.array([g, 1.0]), g * np.array([g, 1.0]), atol=1e-12)
    assert np.allclose(T @ np.array([1 / g, 1.0]), (1 / g) * np.array([1 / g, 1.0]), atol=1e-9 * abs(eta) / abs(g))


def test_transfer_step():
    assert transfer_step(2.5, (1.0, 0.0)) == (2.5, 1.0)
    g = transfer_contraction(2.5)
    pair = (g, 1.0)
    for _ in range(10):
        pair = transfer_step(2.5, pair)
    assert np.allclose(pair, np.array([g, 1.0]) * g**10, atol=1e-12)


def test_ideal_matrix_small_cases():
    assert np.allclose(np.linalg.eigvalsh(ideal_tridiagonal(3.0, 2).dense()), [-2, 0, 2], atol=1e-12)
    for r in (1, 4, 9):
        ev = np.linalg.eigvalsh(ideal_tridiagonal(1.0, r).dense())
        expect = np.sort(2 * np.cos(np.pi * np.arange(1, r + 2) / (r + 2)))
        assert np.allclose(ev, expect, atol=1e-12)
    with pytest.raises(ValueError):
        ideal_tridiagonal(0.0, 3)
    with pytest.raises(ValueError):
        ideal_tridiagonal(2.0, 0)


def test_ideal_matrix_outliers_at_large_r():
    ev = np.linalg.eigvalsh(ideal_tridiagonal(4.0, 200).dense())
    assert abs(ev[-1] - outlier_location(4.0)) <= 1e-6
    assert abs(ev[0] + outlier_location(4.0)) <= 1e-6
    assert np.all(np.abs(ev[1:-1]) <= 2.0)


def _top_residual(alpha, r, sign=1):
    u = ideal_top_coefficients(alpha, r)
    if sign < 0:
        u = u * (-1.0) ** np.arange(r + 1)
    return float(np.linalg.norm(ideal_tridiagonal(alpha, r).dense() @ u - sign * outlier_location(alpha) * u))


def test_ideal_coefficients():
    u = ideal_top_coefficients(4.0, 1)
    assert np.allclose(u, np.array([1.0, math.sqrt(4 / 3)]) / math.sqrt(1 + 4 / 3))
    assert _top_residual(4.0, 50) <= _top_residual(4.0, 25) * (1 / math.sqrt(3)) ** 20 * 10
    for r in (5, 30):
        assert math.isclose(_top_residual(4.0, r, -1), _top_residual(4.0, r), rel_tol=1e-12, abs_tol=1e-15)
    with pytest.raises(ValueError):
        ideal_top_coefficients(2.0, 3)


def test_component_ratio_example():
    assert math.isclose(component_ratio(0.0, math.sqrt(3.0), 0.0, 1.0, 2.5), 0.4375, rel_tol=1e-12)


def test_resonance_raises():
    with pytest.raises(ValueError, match="resonance"):
        component_ratio(0.0, math.sqrt(5.0), 0.0, 1.0, outlier_location(5.0))


def _ratio_oracle(m00, m01, m11, m12, eta):
    # expand (b_2, b_1) over (gamma, 1) and (1, gamma); the ratio of the coordinates
    g = transfer_contraction(eta)
    b1 = (eta - m00) / m01
    b2 = ((eta - m11) * b1 - m01) / m12
    p, q = np.linalg.solve(np.array([[g, 1.0], [1.0, g]]), np.array([b2, b1]))
    return p / q


@given(st.floats(-0.4, 0.4), st.floats(0.8, 3.0), st.floats(-0.05, 0.05), st.floats(0.9, 1.1),
       st.floats(2.1, 6.0))
@settings(max_examples=200)
def test_component_ratio_matches_recursion_oracle(m00, m01, m11, m12, eta):
    try:
        val = component_ratio(m00, m01, m11, m12, eta)
    except ValueError:
        return
    ref = _ratio_oracle(m00, m01, m11, m12, eta)
    assert math.isclose(val, ref, rel_tol=1e-7, abs_tol=1e-9)


def test_growth_floor_without_perturbation():
    g = transfer_contraction(3.0)
    assert growth_rate_floor(0.0, 1.7, 0.0, 1.0, 3.0, 0.0) == 1 / g


def test_growth_floor_double_evaluation():
    eta, eps, dl = 3.0, 1e-3, 0.5
    g = (3.0 - math.sqrt(5.0)) / 2
    by_hand = 1 / g - 8 * (3 + eta) * eps / (1 - g**2) * math.sqrt(1 + 1)
    assert math.isclose(growth_rate_floor(0.0, 1.7, 0.0, 1.0, eta, eps, dl), by_hand, rel_tol=1e-14)
    cond = eta**2 >= 4 + 4**5 * (3 + eta) ** 2 * eps**2 / (1 - g**2) ** 2 * 2
    assert condition_ok(eta, eps, dl) == cond


def test_growth_floor_under_condition():
    rng = np.random.default_rng(5)
    hits = 0
    for _ in range(1000):
        eta = rng.uniform(2.05, 8.0)
        eps = 10 ** rng.uniform(-6, -1)
        dl = rng.uniform(-3, 3)
        if not condition_ok(eta, eps, dl):
            continue
        hits += 1
        g = transfer_contraction(eta)
        assert growth_rate_floor(0, 1, 0, 1, eta, eps, dl) >= 1 + 0.5 * (1 / g - 1)
    assert hits > 300


def test_perturbation_size():
    diag = np.array([0.3, 0.01, -0.02, 0.0, 0.5])
    off = np.array([2.0, 1.03, 0.99, 1.04])
    # rows 1 .. r-1 only: M_00, M_01 and M_rr are excluded, M_{r-1,r} is not
    assert math.isclose(perturbation_size(diag, off), 0.04, rel_tol=1e-12)


def test_boundary_vector_solves_all_rows_but_last():
    rng = np.random.default_rng(2)
    M, eta = random_tridiagonal(rng)
    b = boundary_vector(M, eta)
    resid = (M - eta * np.eye(M.shape[0])) @ b
    assert np.allclose(resid[:-1], 0, atol=1e-8 * np.abs(b).max())
    assert b[0] == 1.0
    assert np.allclose(solve_boundary_vector(M, eta), b, rtol=1e-8)


def test_bound_refusals():
    M = ideal_tridiagonal(3.0, 8).dense()
    assert delocalization_bound(M, 1.9).reason == "eta must exceed 2"
    assert not delocalization_bound(M[:2, :2], 3.0).admissible
    noisy = M + np.diag(np.r_[0, np.full(8, 0.7)])
    assert delocalization_bound(noisy, 3.0).reason == "perturbation exceeds 1/2"
    res = delocalization_bound(M, outlier_location(3.0))
    assert not res.admissible and "resonance" in res.reason


def test_bound_on_perturbed_ideal_matrix():
    rng = np.random.default_rng(0)
    M = ideal_tridiagonal(5.0, 30).dense() + np.diag(rng.uniform(-1e-3, 1e-3, 31))
    ev, vec = np.linalg.eigh(M)
    eta = float(ev[-1])
    bd = delocalization_bound(M, eta)
    if bd.admissible:
        v = vec[:, -1]
        assert v[0] ** 2 <= bd.bound_proof_chain


def test_min_branch_selected():
    M = ideal_tridiagonal(3.0, 3).dense()
    bd = delocalization_bound(M, 2.2)
    g = bd.params.gamma_geq
    pre = bd.bound_on_b0_sq_ratio / min(g ** (-6), 1 / 2)
    assert math.isclose(bd.bound_on_b0_sq_ratio, pre * min(g ** (-6), 0.5))


def test_displayed_bound_counterexample():
    # unperturbed M(3) with ten rows at eta = 3: the steeper tail factor is too small
    M = ideal_tridiagonal(3.0, 9).dense()
    bd = delocalization_bound(M, 3.0)
    assert bd.admissible and bd.eps == 0.0
    b = solve_boundary_vector(M, 3.0)
    actual = b[0] ** 2 / (b @ b)
    assert math.isclose(actual, 1.1162928183413159e-07, rel_tol=1e-8)
    assert math.isclose(bd.bound_on_b0_sq_ratio, 3.05097327019816e-08, rel_tol=1e-8)
    assert actual > bd.bound_on_b0_sq_ratio
    assert actual <= bd.bound_proof_chain


def test_window_params():
    d = 9.0
    assert math.isclose(solve_omega(3.0 * outlier_location(5.0), d, 0.0), 5.0, rel_tol=1e-10)
    oms = [solve_omega(mu, d, 0.1) for mu in (7.0, 8.0, 9.0)]
    assert oms[0] < oms[1] < oms[2]
    with pytest.raises(ValueError):
        solve_omega(5.0, d, 0.5)
    w = window_params(3.0 * (outlier_location(3.0) + 0.1), d, 3.0, 0.1, 10**6)
    assert w.in_w(3.0)
    assert not w.in_w(2.999)
    assert not w.in_w(3.5)


def test_error_scale_formula():
    n, d, tau, k = 10**5, 7.0, 1.5, 3
    logn = math.log(n)
    ref = (3 * math.sqrt(tau) + 2) ** k / math.sqrt(d) * math.sqrt((math.log(d) + logn / d) * (1 + logn / (d * tau)))
    assert math.isclose(tridiag_error_scale(tau, k, d, n), ref, rel_tol=1e-14)


@pytest.mark.parametrize("r", [3, 5])
def test_exact_tree_comparison_is_zero(r):
    t = regular_tree(6, 3, r)
    p = prune(t, 1.5)
    assert p.v_tau.tolist() == [0]
    cmp = tridiag_comparison(t, p, 0, r, operator="plain")
    assert cmp.op_norm_diff < 1e-10
    assert np.allclose(cmp.g_closeness, 0, atol=1e-12)


def test_comparison_on_er_hub():
    g = generate_er(5000, 7.0, 1)
    p = prune(g, 1.5)
    x = int(p.v_tau[np.argmax(g.degrees[p.v_tau])])
    cmp = tridiag_comparison(g, p, x, 3)
    assert np.isfinite(cmp.op_norm_diff) and cmp.op_norm_diff >= 0
    assert cmp.alpha_x == g.degrees[x] / 7.0
    with pytest.raises(ValueError):
        tridiag_comparison(g, p, int(np.argmin(g.degrees)), 3)
    with pytest.raises(ValueError):
        tridiag_comparison(g, p, x, 3, operator="dense")
