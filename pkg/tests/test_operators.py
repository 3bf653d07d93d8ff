import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from er_outliers.graph_core import SparseGraph, degree_order, generate_er
from er_outliers.operators import (
    DENSE_CAP, LAWS, UNIFORM_SCALED, WeightLaw, centered, generalized_alpha, hub_zone, make_wigner,
    materialize_dense, plain, pruned_restricted,
)
from er_outliers.pruning import prune


def test_centered_on_empty_graph():
    n, d = 10, 2.0
    g = SparseGraph.from_edges(n, [], d_param=d)
    out = centered(g).matvec(np.ones(n))
    assert np.allclose(out, -(d / n) * (n - 1))


def test_centered_on_ones_gives_degree_offsets(er_small):
    g = er_small
    out = centered(g).matvec(np.ones(g.n))
    assert np.allclose(out, g.degrees - g.d_param * (g.n - 1) / g.n, atol=1e-12)


def test_centered_matches_dense_oracle(rng):
    g = generate_er(50, 4.0, 3)
    # independent oracle: dense A minus p (J - I)
    A = np.zeros((50, 50))
    for u, v in g.edges().tolist():
        A[u, v] = A[v, u] = 1.0
    p = 4.0 / 50
    M = A - p * (np.ones((50, 50)) - np.eye(50))
    v = rng.standard_normal(50)
    assert np.allclose(centered(g).matvec(v), M @ v, rtol=1e-12, atol=1e-12)


def test_dimension_mismatch(er_small):
    with pytest.raises(ValueError):
        centered(er_small).matvec(np.ones(3))


def test_materialize_two_vertices():
    g = SparseGraph.from_edges(2, [(0, 1)], d_param=1.0)
    assert materialize_dense(plain(g)).tolist() == [[0.0, 1.0], [1.0, 0.0]]
    assert materialize_dense(centered(g)).tolist() == [[0.0, 0.5], [0.5, 0.0]]


def test_dense_cap():
    g = SparseGraph.from_edges(DENSE_CAP + 1, [], d_param=1.0)
    with pytest.raises(ValueError):
        materialize_dense(centered(g))


def test_implicit_matches_dense_on_block(rng):
    g = generate_er(300, 5.0, 4)
    op = centered(g)
    D = materialize_dense(op)
    V = rng.standard_normal((300, 20))
    assert np.allclose(op.matvec(V), D @ V, atol=1e-12)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), kind=st.sampled_from(["plain", "centered", "wigner", "pruned"]))
def test_every_kind_is_symmetric(seed, kind):
    g = generate_er(120, 6.0, seed)
    if kind == "plain":
        op = plain(g)
    elif kind == "centered":
        op = centered(g)
    elif kind == "wigner":
        op = make_wigner(g, "uniform-scaled", seed)
    else:
        p = prune(g, 1.5, radius=1)
        o = degree_order(g)
        op = pruned_restricted(centered(g), p, 2, o)
    r = np.random.default_rng(seed)
    u, v = r.standard_normal(120), r.standard_normal(120)
    a, b = u @ op.matvec(v), op.matvec(u) @ v
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_pruned_restricted_without_hubs_equals_centered(er_small, rng):
    p = prune(er_small, 50.0)
    assert p.v_tau.size == 0
    op = pruned_restricted(centered(er_small), p, 1, degree_order(er_small))
    v = rng.standard_normal(er_small.n)
    assert np.allclose(op.matvec(v), centered(er_small).matvec(v), atol=1e-13)


def test_pruned_restricted_masks_removed_vertices(er_small):
    o = degree_order(er_small)
    p = prune(er_small, 1.5)
    op = pruned_restricted(centered(er_small), p, 3, o)
    for pos in (0, 1):
        e = np.zeros(er_small.n)
        e[o.sigma[pos]] = 1.0
        assert not op.matvec(e).any()
    # masking twice equals masking once
    v = np.random.default_rng(0).standard_normal(er_small.n)
    once = op.matvec(v)
    assert np.array_equal(op.matvec(v * op.mask), once)


def test_pruned_restricted_matches_explicit_masking(rng):
    g = generate_er(40, 5.0, 12)
    o = degree_order(g)
    p = prune(g, 1.3, radius=2)
    op = pruned_restricted(centered(g), p, 2, o)
    # oracle built from scratch: A_tau, shift on the complement of the zone, then mask
    A = np.zeros((40, 40))
    for u, v in p.graph.edges().tolist():
        A[u, v] = A[v, u] = 1.0
    z = hub_zone(p)
    out = (~z).astype(float)
    P = np.diag(out)
    EA = (5.0 / 40) * (np.ones((40, 40)) - np.eye(40))
    M = A - P @ EA @ P
    keep = np.ones(40)
    keep[o.sigma[:1]] = 0.0
    M = M * np.outer(keep, keep)
    v = rng.standard_normal(40)
    assert np.allclose(op.matvec(v), M @ v, atol=1e-13)
    assert np.allclose(materialize_dense(op), M, atol=1e-13)


def test_pruned_restricted_rejects_foreign_graph(er_small):
    other = generate_er(300, 5.0, 999)
    with pytest.raises(ValueError):
        pruned_restricted(centered(er_small), prune(other, 1.5), 1, degree_order(er_small))


def test_restricted_powers_agree_with_pruned_adjacency_near_hub():
    g = generate_er(3000, 4.0, 21)
    o = degree_order(g)
    p = prune(g, 1.5, radius=4)
    x = int(p.v_tau[0])
    op = pruned_restricted(centered(g), p, int(o.rank()[x]), o)
    A = plain(p.graph)
    e = np.zeros(g.n)
    e[x] = 1.0
    a, b = e.copy(), e.copy()
    for _ in range(p.radii[x] - 2):
        a, b = op.matvec(a), A.matvec(b)
        # the two agree on the ball where the shift vanishes; masked hubs may differ
        zone = hub_zone(p)
        assert np.allclose(a[zone], b[zone] * op.mask[zone])


def test_rademacher_weights_and_alpha(er_small):
    X = make_wigner(er_small, "rademacher", 5)
    assert set(np.unique(X.weights).tolist()) <= {-1.0, 1.0}
    assert np.allclose(generalized_alpha(X, er_small.d_param), er_small.degrees / er_small.d_param)


def test_wigner_is_symmetric_and_on_edges(er_small):
    X = make_wigner(er_small, "uniform-scaled", 2)
    D = materialize_dense(X)
    assert np.array_equal(D, D.T)
    A = materialize_dense(plain(er_small))
    assert np.array_equal(D != 0, A != 0)
    assert np.abs(D).max() <= math.sqrt(3) + 1e-12


def test_uniform_scaled_variance():
    g = generate_er(40_000, 5.0, 1)
    w = make_wigner(g, UNIFORM_SCALED, 3).edge_weights()
    assert w.size >= 10**5 - 10**4
    # the sample variance of U(-sqrt3, sqrt3) has standard error sqrt(Var(W^2) / m) = sqrt(0.8 / m)
    assert abs(np.mean(w**2) - 1.0) <= 3 * math.sqrt(0.8 / w.size)


def test_laws_are_validated():
    bad = WeightLaw("shifted", lambda r, m: r.uniform(0, 1, m), 0.5, 1 / 12, 1.0)
    with pytest.raises(ValueError):
        make_wigner(generate_er(30, 3.0, 0), bad)
    assert set(LAWS) == {"rademacher", "uniform-scaled"}


def test_generalized_alpha_bounds():
    g = SparseGraph.from_edges(5, [(0, 1), (1, 2)], d_param=2.0)
    X = make_wigner(g, "uniform-scaled", 0)
    a = generalized_alpha(X, 2.0)
    assert a[3] == 0.0 and a[4] == 0.0
    assert np.all(a <= 3.0 * g.degrees / 2.0 + 1e-12)
