"""Graph filtrations, Betti curves and persistence diagrams.

Two conventions live side by side here:

* Betti curves threshold *above*: at filtration value ``eps`` the graph keeps
  the edges with ``w > eps``. Raising ``eps`` deletes edges, so beta0 grows
  and beta1 shrinks.
* Persistence diagrams use edge *addition*: an edge enters once
  ``w <= eps``, which is the usual Rips-style convention with finite births.

Betti curves come from a union-find sweep; diagrams from a minimum spanning forest.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import minimum_spanning_tree

from .errors import EmptyGraph, TopoDistError
from .network import WeightedNetwork


class UnionFind:
    """Disjoint sets with path halving, union by size and a largest-set tracker."""

    def __init__(self, size):
        self.parent = list(range(size))
        self.size = [1] * size
        self.components = size
        self.largest = 1 if size else 0

    def find(self, a):
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a, b):
        """Merge the sets of a and b; return the absorbed root, or None."""
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return None
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        self.components -= 1
        if self.size[ra] > self.largest:
            self.largest = self.size[ra]
        return rb


def binary_network(W: WeightedNetwork, epsilon: float) -> np.ndarray:
    """0/1 adjacency with an edge wherever ``w_ij > epsilon``."""
    adj = (W.weights > epsilon).astype(np.int8)
    np.fill_diagonal(adj, 0)
    return adj


@dataclass(frozen=True)
class Filtration:
    thresholds: np.ndarray

    @property
    def levels(self):
        return len(self.thresholds)


def maximal_filtration(W: WeightedNetwork) -> Filtration:
    """Zero followed by the sorted unique positive edge weights.

    Tied weights collapse into one level, so the level count is
    ``#unique weights + 1`` rather than ``#edges + 1``.
    """
    _, _, w = W.edges()
    if w.size == 0:
        raise EmptyGraph("network has no positive edge weight")
    return Filtration(np.concatenate(([0.0], np.unique(w))))


@dataclass(frozen=True)
class BettiCurve:
    """beta0/beta1 (and largest component size) sampled on ``grid``.

    Values at ``grid[t]`` describe the graph with edges ``w > grid[t]``.
    """

    grid: np.ndarray
    beta0: np.ndarray
    beta1: np.ndarray
    largest_component: np.ndarray
    node_count: int

    def feature(self, name):
        if name == "beta0":
            return self.beta0
        if name == "beta1":
            return self.beta1
        if name == "gamma":
            return self.largest_component
        raise TopoDistError(f"unknown feature {name!r}")

    def write_csv(self, path_or_file):
        rows = [(repr(float(e)), int(b0), int(b1))
                for e, b0, b1 in zip(self.grid, self.beta0, self.beta1)]
        _write_rows(path_or_file, ("epsilon", "beta0", "beta1"), rows)


def _write_rows(path_or_file, header, rows):
    if hasattr(path_or_file, "write"):
        writer = csv.writer(path_or_file, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
        return
    with open(path_or_file, "w", newline="") as fh:
        _write_rows(fh, header, rows)


def betti_curve(W: WeightedNetwork, grid=None) -> BettiCurve:
    """Betti numbers of the threshold-above filtration on ``grid``.

    Edges are inserted heaviest first while the threshold sweeps downward;
    beta0 is read off the union-find and beta1 follows from the Euler
    characteristic, beta1 = beta0 - p + (number of edges kept).
    The default grid is the maximal filtration (just ``[0]`` for an
    edgeless network).
    """
    p = W.node_count
    iu, ju, w = W.edges() if not W.signed else _signed_edges(W)
    if grid is None:
        grid = np.concatenate(([0.0], np.unique(w[w > 0])))
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise TopoDistError("grid must be a non-empty 1-d sequence")
    if (np.diff(grid) <= 0).any():
        raise TopoDistError("grid must be strictly increasing")

    order = np.argsort(-w, kind="stable")
    iu, ju, w = iu[order].tolist(), ju[order].tolist(), w[order].tolist()

    uf = UnionFind(p)
    beta0 = np.empty(grid.size, dtype=np.int64)
    edges_kept = np.empty(grid.size, dtype=np.int64)
    largest = np.empty(grid.size, dtype=np.int64)
    e = 0
    for t in range(grid.size - 1, -1, -1):
        eps = grid[t]
        while e < len(w) and w[e] > eps:
            uf.union(iu[e], ju[e])
            e += 1
        beta0[t] = uf.components
        edges_kept[t] = e
        largest[t] = uf.largest
    beta1 = beta0 - p + edges_kept
    return BettiCurve(grid, beta0, beta1, largest, p)


def _signed_edges(W):
    # Signed (correlation) networks: every off-diagonal pair is a candidate
    # edge; the grid decides which are present.
    iu, ju = np.triu_indices(W.node_count, k=1)
    return iu, ju, W.weights[iu, ju]


@dataclass(frozen=True)
class PersistenceDiagram:
    """Multiset of (birth, death) pairs; ``math.inf`` marks a feature that never dies."""

    dimension: int
    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).reshape(-1, 2)
        if self.dimension not in (0, 1):
            raise TopoDistError(f"dimension must be 0 or 1, got {self.dimension}")
        if (pts[:, 1] < pts[:, 0]).any():
            raise TopoDistError("death precedes birth in persistence diagram")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    def __len__(self):
        return len(self.points)

    @property
    def finite(self):
        return self.points[np.isfinite(self.points[:, 1])]

    @property
    def infinite(self):
        return self.points[~np.isfinite(self.points[:, 1])]

    def write_csv(self, path_or_file):
        rows = [(repr(float(b)), "inf" if math.isinf(d) else repr(float(d)))
                for b, d in self.points]
        _write_rows(path_or_file, ("birth", "death"), rows)

    @classmethod
    def read_csv(cls, path, dimension):
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows and rows[0] and rows[0][0].strip().lower() == "birth":
            rows = rows[1:]
        pts = [(float(b), float(d)) for b, d in rows if (b, d) != ("", "")]
        return cls(dimension, np.array(pts, dtype=float).reshape(-1, 2))


def persistence_diagram(W: WeightedNetwork, dimension: int) -> PersistenceDiagram:
    """Persistence diagram of the edge-addition filtration.

    Dimension 0: every node is born at 0; each minimum-spanning-forest edge
    kills one component at its weight; the survivors never die.
    Dimension 1: each edge that closes a cycle gives a class born at its
    weight that never dies (there are no triangles to fill it in). These are
    exactly the non-forest edges, and every minimum spanning forest has the
    same weight multiset, so tie-breaking does not matter.
    """
    if dimension not in (0, 1):
        raise TopoDistError(f"dimension must be 0 or 1, got {dimension}")
    p = W.node_count
    forest = minimum_spanning_tree(W.weights)  # zero entries are non-edges
    deaths = np.sort(forest.data)
    if dimension == 0:
        survivors = np.full(p - deaths.size, math.inf)
        pts = np.column_stack((np.zeros(p), np.concatenate((deaths, survivors))))
        return PersistenceDiagram(0, pts)
    _, _, w = W.edges()
    values, counts = np.unique(w, return_counts=True)
    used, used_counts = np.unique(deaths, return_counts=True)
    counts[np.searchsorted(values, used)] -= used_counts
    births = np.repeat(values, counts)
    return PersistenceDiagram(1, np.column_stack((births, np.full(births.size, math.inf))))
