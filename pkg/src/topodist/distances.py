"""Topological distances between networks: bottleneck, Gromov-Hausdorff, KS."""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np
from scipy.cluster.hierarchy import cophenet, linkage
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_bipartite_matching
from scipy.spatial.distance import squareform

from .errors import DimensionMismatch, InfiniteSLD, TopoDistError
from .filtration import PersistenceDiagram, betti_curve, persistence_diagram
from .network import WeightedNetwork, log_euclidean_distance, norm_distance


class Method(str, Enum):
    L1 = "l1"
    L2 = "l2"
    LINF = "linf"
    LOG_EUCLIDEAN = "logeuclid"
    BOTTLENECK = "bottleneck"
    GH = "gh"
    KS = "ks"


class Feature(str, Enum):
    BETA0 = "beta0"
    BETA1 = "beta1"
    GAMMA = "gamma"


@dataclass(frozen=True)
class DistanceValue:
    value: float
    method: Optional[Method]
    feature: Optional[Feature] = None
    argmax_threshold: Optional[float] = None

    def __float__(self):
        return float(self.value)

    def to_dict(self):
        return {
            "value": self.value,
            "method": self.method.value if self.method is not None else None,
            "feature": self.feature.value if self.feature is not None else None,
            "argmax": self.argmax_threshold,
        }


def _check_same_nodes(W1, W2):
    if W1.node_count != W2.node_count:
        raise DimensionMismatch(
            f"networks have {W1.node_count} and {W2.node_count} nodes")


def single_linkage_matrix(W: WeightedNetwork) -> np.ndarray:
    """Minimax path weights (single-linkage merge heights).

    ``s_ij`` is the largest edge on the minimum-spanning-tree path between i
    and j. The tree is grown with Prim's algorithm over the positive edges;
    each newly attached node ``v`` with tree parent ``u`` and edge weight
    ``x`` gets ``s_vt = max(s_ut, x)`` for every node ``t`` already in the
    tree. Pairs in different components stay at ``inf``.

    Complete graphs take a faster route: the cophenetic distances of
    single-linkage clustering are the same merge heights.
    """
    p = W.node_count
    if p > 1 and (W.weights + np.eye(p) > 0).all():
        return squareform(cophenet(linkage(squareform(W.weights, checks=False), "single")))
    w = np.where(W.weights > 0, W.weights, math.inf)
    np.fill_diagonal(w, math.inf)
    S = np.full((p, p), math.inf)
    np.fill_diagonal(S, 0.0)
    in_tree = np.zeros(p, dtype=bool)
    best = np.full(p, math.inf)      # cheapest edge from each node into the tree
    parent = np.full(p, -1)
    members = []                     # current component, in attachment order
    for _ in range(p):
        cand = np.where(in_tree, math.inf, best)
        v = int(np.argmin(cand))
        if math.isinf(cand[v]):
            # Start a new component at the first unvisited node.
            v = int(np.argmin(in_tree))
            members = []
        else:
            u = parent[v]
            row = np.maximum(S[u, members], cand[v])
            S[v, members] = row
            S[members, v] = row
        in_tree[v] = True
        members.append(v)
        closer = w[v] < best
        best = np.where(closer, w[v], best)
        parent = np.where(closer, v, parent)
    return S


def gh_distance(W1: WeightedNetwork, W2: WeightedNetwork) -> DistanceValue:
    """Half the largest absolute difference between the two single-linkage matrices.

    Nodes are assumed to correspond by index. Pairs disconnected in both
    networks are skipped; a pair disconnected in only one raises
    :class:`InfiniteSLD`.
    """
    _check_same_nodes(W1, W2)
    return DistanceValue(_gh_from_slm(single_linkage_matrix(W1), single_linkage_matrix(W2)), Method.GH)


def _gh_from_slm(S1, S2):
    inf1, inf2 = np.isinf(S1), np.isinf(S2)
    if (inf1 != inf2).any():
        i, j = np.argwhere(inf1 != inf2)[0]
        raise InfiniteSLD(f"nodes {i} and {j} are connected in only one network")
    finite = ~inf1
    return 0.5 * float(np.abs(S1[finite] - S2[finite]).max())


def _infinite_bottleneck(b1, b2):
    if b1.size != b2.size:
        return math.inf
    if b1.size == 0:
        return 0.0
    return float(np.abs(np.sort(b1) - np.sort(b2)).max())


def _augmented_costs(A, B):
    """L-inf cost matrix between A + diag(B) and B + diag(A).

    Rows are A's points followed by the diagonal projections of B's points;
    columns are B's points followed by the projections of A's points. A
    point pairs only with its own projection, at cost (death - birth) / 2;
    using another point's projection is never cheaper.
    """
    m, n = len(A), len(B)
    cost = np.full((m + n, n + m), math.inf)
    if m and n:
        cost[:m, :n] = np.abs(A[:, None, :] - B[None, :, :]).max(axis=2)
    cost[np.arange(m), n + np.arange(m)] = (A[:, 1] - A[:, 0]) / 2
    cost[m + np.arange(n), np.arange(n)] = (B[:, 1] - B[:, 0]) / 2
    cost[m:, n:] = 0.0
    return cost


def _has_perfect_matching(mask):
    rows, cols = np.nonzero(mask)
    indptr = np.zeros(mask.shape[0] + 1, dtype=np.int32)
    np.cumsum(mask.sum(axis=1), out=indptr[1:])
    graph = csr_matrix((np.ones(rows.size, dtype=np.int8), cols.astype(np.int32), indptr),
                       shape=mask.shape)
    match = maximum_bipartite_matching(graph, perm_type="column")
    return bool((match >= 0).all())


def _feasible_upper_bound(cost, A, B):
    # Cost of one explicit bijection, read from the cost matrix so the bound
    # is itself a candidate value: every point to its own diagonal
    # projection, or (equal counts) points paired in lexicographic order.
    m, n = len(A), len(B)
    bound = max(cost[np.arange(m), n + np.arange(m)].max(initial=0.0),
                cost[m + np.arange(n), np.arange(n)].max(initial=0.0))
    if m == n:
        ia = np.lexsort((A[:, 1], A[:, 0]))
        ib = np.lexsort((B[:, 1], B[:, 0]))
        bound = min(bound, cost[ia, ib].max())
    return bound


def _finite_bottleneck(A, B):
    if len(A) == 0 and len(B) == 0:
        return 0.0
    cost = _augmented_costs(A, B)
    # No perfect matching can beat the worst row or column minimum.
    floor = max(cost.min(axis=1).max(), cost.min(axis=0).max())
    ceiling = _feasible_upper_bound(cost, A, B)
    window = cost[(cost >= floor) & (cost <= ceiling)]
    candidates = np.unique(window)
    lo, hi = 0, len(candidates) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _has_perfect_matching(cost <= candidates[mid]):
            hi = mid
        else:
            lo = mid + 1
    return float(candidates[lo])


def bottleneck_distance(P1: PersistenceDiagram, P2: PersistenceDiagram) -> DistanceValue:
    """Bottleneck distance between two persistence diagrams.

    Points that never die are matched only with each other, in birth order;
    unequal counts give ``inf``. Finite points are matched over the
    diagonal-augmented diagrams by binary search on the cost threshold with a
    maximum-matching feasibility test.
    """
    if P1.dimension != P2.dimension:
        raise DimensionMismatch(
            f"diagram dimensions differ: {P1.dimension} vs {P2.dimension}")
    inf_part = _infinite_bottleneck(P1.infinite[:, 0], P2.infinite[:, 0])
    if math.isinf(inf_part):
        return DistanceValue(math.inf, Method.BOTTLENECK)
    fin_part = _finite_bottleneck(P1.finite, P2.finite)
    return DistanceValue(max(inf_part, fin_part), Method.BOTTLENECK)


def network_bottleneck(W1: WeightedNetwork, W2: WeightedNetwork, dimension: int = 0) -> DistanceValue:
    return bottleneck_distance(persistence_diagram(W1, dimension), persistence_diagram(W2, dimension))


def merged_grid(W1: WeightedNetwork, W2: WeightedNetwork) -> np.ndarray:
    """Zero plus the sorted unique positive edge weights of both networks."""
    w = np.concatenate((_grid_weights(W1), _grid_weights(W2)))
    return np.unique(np.concatenate(([0.0], w[w > 0])))


def _grid_weights(W):
    iu, ju = np.triu_indices(W.node_count, k=1)
    return W.weights[iu, ju]


def feature_curves(W1: WeightedNetwork, W2: WeightedNetwork, feature="beta0", grid=None):
    """Both networks' feature curves on a common grid (default: merged edge weights)."""
    _check_same_nodes(W1, W2)
    feature = Feature(feature)
    if grid is None:
        grid = merged_grid(W1, W2)
    grid = np.asarray(grid, dtype=float)
    return grid, betti_curve(W1, grid).feature(feature.value), betti_curve(W2, grid).feature(feature.value)


def ks_distance(W1: WeightedNetwork, W2: WeightedNetwork, feature="beta0", grid=None) -> DistanceValue:
    """Largest gap between a monotone graph feature of two filtrations.

    With the default grid (every edge weight of either network) the sup over
    the grid equals the sup over all thresholds. Ties for the argmax resolve
    to the smallest threshold.
    """
    grid, f1, f2 = feature_curves(W1, W2, feature, grid)
    gaps = np.abs(f1 - f2)
    t = int(np.argmax(gaps))
    return DistanceValue(float(gaps[t]), Method.KS, Feature(feature), float(grid[t]))


def compute_distance(W1, W2, method, *, feature="beta0", dimension=0, grid=None, alpha=0.0) -> DistanceValue:
    """Dispatch on :class:`Method`; used by the CLI and the simulation harness."""
    method = Method(method)
    if method is Method.L1:
        return DistanceValue(norm_distance(W1, W2, 1), method)
    if method is Method.L2:
        return DistanceValue(norm_distance(W1, W2, 2), method)
    if method is Method.LINF:
        return DistanceValue(norm_distance(W1, W2, np.inf), method)
    if method is Method.LOG_EUCLIDEAN:
        return DistanceValue(log_euclidean_distance(W1.weights, W2.weights, alpha), method)
    if method is Method.BOTTLENECK:
        return network_bottleneck(W1, W2, dimension)
    if method is Method.GH:
        return gh_distance(W1, W2)
    if method is Method.KS:
        return ks_distance(W1, W2, feature, grid)
    raise TopoDistError(f"unknown method {method!r}")  # pragma: no cover
