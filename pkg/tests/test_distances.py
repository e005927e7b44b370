import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topodist import (
    DistanceValue,
    Method,
    PersistenceDiagram,
    WeightedNetwork,
    bottleneck_distance,
    compute_distance,
    gh_distance,
    ks_distance,
    merged_grid,
    network_bottleneck,
    single_linkage_matrix,
)
from topodist.errors import DimensionMismatch, InfiniteSLD

from conftest import network_from_edges, random_network

SLM_EXPECTED = np.array([[0, 0.2, 0.5], [0.2, 0, 0.5], [0.5, 0.5, 0]])


@pytest.fixture
def gh_triangle():
    return network_from_edges(3, [(0, 1, 0.2), (0, 2, 0.5), (1, 2, 0.5)])


@pytest.fixture
def gh_path():
    return network_from_edges(3, [(0, 1, 0.2), (0, 2, 0.5)])


def minimax_oracle(W):
    """All-pairs minimax path weights, Floyd-Warshall style."""
    w = W.weights
    A = np.where(w > 0, w, np.inf)
    np.fill_diagonal(A, 0.0)
    for k in range(len(A)):
        A = np.minimum(A, np.maximum(A[:, [k]], A[[k], :]))
    return A


# -- single linkage / GH ----------------------------------------------------------

def test_slm_discussion_pair(gh_triangle, gh_path):
    np.testing.assert_array_equal(single_linkage_matrix(gh_triangle), SLM_EXPECTED)
    np.testing.assert_array_equal(single_linkage_matrix(gh_path), SLM_EXPECTED)


def test_slm_two_nodes():
    S = single_linkage_matrix(WeightedNetwork(np.array([[0, 0.7], [0.7, 0]])))
    np.testing.assert_array_equal(S, [[0, 0.7], [0.7, 0]])


def test_slm_disconnected():
    W = network_from_edges(4, [(0, 1, 0.3), (2, 3, 0.1)])
    S = single_linkage_matrix(W)
    assert S[0, 1] == 0.3 and S[2, 3] == 0.1
    assert np.isinf(S[0, 2]) and np.isinf(S[1, 3])


@settings(max_examples=100, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(2, 12), density=st.floats(0.2, 1.0))
def test_slm_ultrametric_and_oracle(seed, p, density):
    W = random_network(np.random.default_rng(seed), p, density, decimals=2)
    S = single_linkage_matrix(W)
    np.testing.assert_array_equal(S, minimax_oracle(W))
    assert (S == S.T).all() and (np.diag(S) == 0).all() and (S >= 0).all()
    for i, j, k in itertools.product(range(p), repeat=3):
        assert S[i, j] <= max(S[i, k], S[k, j])
    edge = W.weights > 0
    assert (S[edge] <= W.weights[edge]).all()


def test_gh_discussion_degeneracy(gh_triangle, gh_path):
    assert gh_distance(gh_triangle, gh_path).value == 0
    assert not np.array_equal(gh_triangle.weights, gh_path.weights)


def test_gh_random_oracle(rng):
    for _ in range(10):
        A, B = random_network(rng, 5), random_network(rng, 5)
        want = 0.5 * np.abs(minimax_oracle(A) - minimax_oracle(B)).max()
        assert gh_distance(A, B).value == pytest.approx(want, abs=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_gh_pseudometric(seed):
    r = np.random.default_rng(seed)
    A, B, C = (random_network(r, 7) for _ in range(3))
    assert gh_distance(A, A).value == 0
    assert gh_distance(A, B).value == gh_distance(B, A).value
    assert gh_distance(A, C).value <= gh_distance(A, B).value + gh_distance(B, C).value + 1e-15


def test_gh_errors(rng):
    with pytest.raises(DimensionMismatch):
        gh_distance(random_network(rng, 3), random_network(rng, 4))
    split = network_from_edges(3, [(0, 1, 0.2)])
    whole = network_from_edges(3, [(0, 1, 0.2), (1, 2, 0.4)])
    with pytest.raises(InfiniteSLD):
        gh_distance(split, whole)
    # Pairs disconnected in both networks are skipped.
    assert gh_distance(split, network_from_edges(3, [(0, 1, 0.5)])).value == pytest.approx(0.15)


# -- bottleneck ---------------------------------------------------------------------

def brute_bottleneck(A, B):
    """Minimum over all bijections of the diagonal-augmented diagrams.

    Sending a point to any diagonal slot costs its L-inf distance to the
    diagonal, (death - birth) / 2.
    """
    A, B = np.asarray(A, float).reshape(-1, 2), np.asarray(B, float).reshape(-1, 2)
    m, n = len(A), len(B)
    rows = [("pt", a) for a in A] + [("diag", None)] * n
    cols = [("pt", b) for b in B] + [("diag", None)] * m

    def cost(r, c):
        if r[0] == "diag" and c[0] == "diag":
            return 0.0
        if r[0] == "diag":
            return (c[1][1] - c[1][0]) / 2
        if c[0] == "diag":
            return (r[1][1] - r[1][0]) / 2
        return float(np.abs(r[1] - c[1]).max())

    C = [[cost(r, c) for c in cols] for r in rows]
    best = math.inf
    for perm in itertools.permutations(range(m + n)):
        best = min(best, max((C[i][j] for i, j in enumerate(perm)), default=0.0))
    return best


def _diagram(pts, dim=0):
    return PersistenceDiagram(dim, np.asarray(pts, float).reshape(-1, 2))


def test_bottleneck_examples():
    assert bottleneck_distance(_diagram([(0, 1)]), _diagram([(0, 1)])).value == 0
    assert bottleneck_distance(_diagram([(0, 1)]), _diagram([(0, 1.4)])).value == pytest.approx(0.4)
    assert bottleneck_distance(_diagram([(0, 1)]), _diagram([])).value == 0.5


def test_bottleneck_matches_factorial_oracle(rng):
    for _ in range(60):
        m, n = rng.integers(0, 5, size=2)
        A = np.sort(np.round(rng.random((m, 2)), 2), axis=1)
        B = np.sort(np.round(rng.random((n, 2)), 2), axis=1)
        assert bottleneck_distance(_diagram(A), _diagram(B)).value == brute_bottleneck(A, B)


def test_bottleneck_infinite_points():
    inf = math.inf
    a = _diagram([(0.1, inf), (0.5, inf), (0, 0.3)], 1)
    b = _diagram([(0.45, inf), (0.2, inf), (0, 0.3)], 1)
    assert bottleneck_distance(a, b).value == pytest.approx(0.1)
    c = _diagram([(0.1, inf)], 1)
    assert math.isinf(bottleneck_distance(a, c).value)
    with pytest.raises(DimensionMismatch):
        bottleneck_distance(a, _diagram([(0, 1)], 0))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_bottleneck_symmetric_and_triangle(seed):
    r = np.random.default_rng(seed)
    A, B, C = (_diagram(np.sort(r.random((r.integers(0, 6), 2)), axis=1)) for _ in range(3))
    ab, ba = bottleneck_distance(A, B).value, bottleneck_distance(B, A).value
    assert ab == ba
    assert bottleneck_distance(A, C).value <= ab + bottleneck_distance(B, C).value + 1e-12


def test_network_bottleneck_examples(triangle):
    big = network_from_edges(3, [(0, 1, 0.2), (1, 2, 0.3), (0, 2, 0.9)])
    assert network_bottleneck(triangle, big, 1).value == pytest.approx(0.4)
    shifted = network_from_edges(3, [(0, 1, 0.25), (1, 2, 0.3), (0, 2, 0.5)])
    assert network_bottleneck(triangle, shifted, 0).value == pytest.approx(0.05)
    assert network_bottleneck(triangle, triangle, 0).value == 0


def test_network_bottleneck_same_pq_is_finite(rng):
    for _ in range(10):
        A, B = random_network(rng, 9), random_network(rng, 9)
        for dim in (0, 1):
            assert math.isfinite(network_bottleneck(A, B, dim).value)


# -- KS distance ----------------------------------------------------------------------

def test_ks_self(triangle):
    d = ks_distance(triangle, triangle)
    assert d.value == 0 and d.method is Method.KS


def test_ks_triangle_vs_edgeless(triangle, edgeless3):
    d = ks_distance(triangle, edgeless3, "beta0")
    assert d.value == 2 and d.argmax_threshold == 0.0
    np.testing.assert_array_equal(merged_grid(triangle, edgeless3), [0, 0.2, 0.3, 0.5])
    g = ks_distance(triangle, edgeless3, "gamma")
    assert g.value == 2 and g.argmax_threshold == 0.0


def test_ks_gamma_oracle(rng):
    from scipy.sparse.csgraph import connected_components

    from topodist import binary_network

    A, B = random_network(rng, 7, 0.5), random_network(rng, 7, 0.5)
    grid = merged_grid(A, B)

    def largest(W, eps):
        _, labels = connected_components(binary_network(W, eps), directed=False)
        return np.bincount(labels).max()

    want = max(abs(largest(A, e) - largest(B, e)) for e in grid)
    assert ks_distance(A, B, "gamma").value == want


def test_ks_discussion_pair_beta1(gh_triangle, gh_path):
    d = ks_distance(gh_triangle, gh_path, "beta1")
    assert d.value == 1 and d.argmax_threshold < 0.2


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), feature=st.sampled_from(["beta0", "beta1", "gamma"]))
def test_ks_monotone_invariance(seed, feature):
    r = np.random.default_rng(seed)
    A, B = random_network(r, 8), random_network(r, 8)

    def phi(W):  # strictly increasing on the positive weights
        w = W.weights
        return WeightedNetwork(np.where(w > 0, np.exp(3 * w) - 0.5, 0.0))

    assert ks_distance(A, B, feature).value == ks_distance(phi(A), phi(B), feature).value


def test_ks_dimension_mismatch(rng):
    with pytest.raises(DimensionMismatch):
        ks_distance(random_network(rng, 3), random_network(rng, 4))


# -- dispatcher -----------------------------------------------------------------------

def test_compute_distance_dispatch(rng, triangle):
    A, B = random_network(rng, 5), random_network(rng, 5)
    for m in Method:
        if m is Method.LOG_EUCLIDEAN:
            continue
        d = compute_distance(A, B, m)
        assert isinstance(d, DistanceValue) and d.value >= 0
        assert compute_distance(A, A, m).value == 0
    assert compute_distance(A, B, "linf").to_dict()["method"] == "linf"
