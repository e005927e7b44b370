"""Weighted networks built from node measurements, plus element-wise distances.

A network is a symmetric weight matrix over ``p`` nodes. Weights usually come
from correlations between node measurement vectors, pushed through one of the
transforms in :class:`WeightTransform`. Throughout the package a weight of
exactly zero off the diagonal means "no edge".
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, NamedTuple, Union

import numpy as np

from .errors import (
    ConstantColumn,
    DimensionMismatch,
    NegativeWeight,
    NotPositiveDefinite,
    NotStandardized,
    NumericalDomain,
    TopoDistError,
)

SYMMETRY_TOL = 1e-12
CLAMP_TOL = 1e-12
PD_TOL = 1e-10


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DataMatrix:
    """Observations (rows) by nodes (columns)."""

    values: np.ndarray
    standardized: bool = False

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2:
            raise TopoDistError(f"data matrix must be 2-d, got shape {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def p(self):
        return self.values.shape[1]


@dataclass(frozen=True)
class WeightedNetwork:
    """Symmetric edge-weight matrix over ``p`` nodes.

    With ``signed=False`` (the default) weights must be nonnegative with a
    zero diagonal. ``signed=True`` relaxes both checks so raw correlation
    matrices can be filtered directly; the diagonal is then ignored by every
    graph operation. Symmetry is always enforced.
    """

    weights: np.ndarray
    signed: bool = False

    def __post_init__(self):
        w = _frozen(self.weights)
        if w.ndim != 2 or w.shape[0] != w.shape[1]:
            raise DimensionMismatch(f"weight matrix must be square, got shape {w.shape}")
        if w.shape[0] < 1:
            raise TopoDistError("network needs at least one node")
        if np.isnan(w).any():
            raise TopoDistError("weight matrix contains NaN")
        if not np.allclose(w, w.T, rtol=0.0, atol=SYMMETRY_TOL):
            i, j = np.unravel_index(np.argmax(np.abs(w - w.T)), w.shape)
            raise TopoDistError(f"weight matrix is not symmetric at ({i}, {j})")
        if not self.signed:
            if (w < 0).any():
                i, j = np.argwhere(w < 0)[0]
                raise NegativeWeight(f"negative weight {w[i, j]} at ({i}, {j})")
            if (np.diag(w) != 0).any():
                raise TopoDistError("diagonal of a weight matrix must be zero")
        object.__setattr__(self, "weights", w)

    @property
    def node_count(self):
        return self.weights.shape[0]

    def edges(self):
        """Return ``(i, j, w)`` arrays for all upper-triangle pairs with w > 0."""
        iu, ju = np.triu_indices(self.node_count, k=1)
        w = self.weights[iu, ju]
        keep = w > 0
        return iu[keep], ju[keep], w[keep]


class WeightTransform(str, Enum):
    ONE_MINUS = "one-minus"
    SQRT_ONE_MINUS = "sqrt-one-minus"
    ARCCOS = "arccos"
    POWER_ARCCOS = "power-arccos"
    POWER_SQRT = "power-sqrt"
    CORRELATION = "correlation"


def standardize(X: DataMatrix) -> DataMatrix:
    """Center each column and scale it to unit Euclidean norm.

    After this, ``x_i @ x_j`` is the Pearson correlation of columns i and j.
    """
    v = np.asarray(X.values, dtype=float)
    if v.shape[0] < 2:
        raise TopoDistError(f"need at least 2 observations, got {v.shape[0]}")
    centered = v - v.mean(axis=0)
    norms = np.linalg.norm(centered, axis=0)
    scale = np.maximum(np.abs(v).max(axis=0), 1.0)
    bad = np.flatnonzero(norms <= 1e-13 * scale * np.sqrt(v.shape[0]))
    if bad.size:
        raise ConstantColumn(int(bad[0]))
    return DataMatrix(centered / norms, standardized=True)


def correlation_matrix(X: DataMatrix) -> np.ndarray:
    """Pearson correlations of a standardized data matrix, clamped to [-1, 1]."""
    if not X.standardized:
        raise NotStandardized("data matrix must be standardized first")
    r = X.values.T @ X.values
    worst = np.abs(r).max()
    if worst > 1 + CLAMP_TOL:
        raise NumericalDomain(f"correlation magnitude {worst!r} exceeds 1")
    r = np.clip(r, -1.0, 1.0)
    np.fill_diagonal(r, 1.0)
    return (r + r.T) / 2


def correlation_network(X: DataMatrix, transform=WeightTransform.SQRT_ONE_MINUS, m: int = 1) -> WeightedNetwork:
    """Edge weights from pairwise correlations of the columns of ``X``.

    ``m`` is the root order used by the power transforms:
    ``arccos(r) ** (1/m)`` and ``(1 - r) ** (1 / (2m))``.
    """
    transform = WeightTransform(transform)
    if m < 1 or int(m) != m:
        raise TopoDistError(f"transform order m must be a positive integer, got {m}")
    r = correlation_matrix(X)
    if transform is WeightTransform.CORRELATION:
        return WeightedNetwork(r, signed=True)
    if transform is WeightTransform.ONE_MINUS:
        w = 1.0 - r
    elif transform is WeightTransform.SQRT_ONE_MINUS:
        w = np.sqrt(1.0 - r)
    elif transform is WeightTransform.ARCCOS:
        w = np.arccos(r)
    elif transform is WeightTransform.POWER_ARCCOS:
        w = np.arccos(r) ** (1.0 / m)
    else:
        w = (1.0 - r) ** (1.0 / (2 * m))
    np.fill_diagonal(w, 0.0)
    return WeightedNetwork(w)


@dataclass(frozen=True)
class MetricReport:
    nonnegativity_ok: bool
    identity_ok: bool
    symmetry_ok: bool
    triangle_violations: list = field(default_factory=list)

    @property
    def is_metric(self):
        return (self.nonnegativity_ok and self.identity_ok and self.symmetry_ok
                and not self.triangle_violations)


def check_metric(W: WeightedNetwork, tol: float = 1e-12) -> MetricReport:
    """Check the metric axioms on every ordered triple of distinct nodes.

    A triple ``(i, j, k)`` is reported when ``w_ij - w_ik - w_kj > tol``.
    ``tol`` only absorbs rounding on exactly-degenerate triangles.
    """
    w = W.weights
    p = W.node_count
    violations = []
    for k in range(p):
        excess = w - w[:, k][:, None] - w[k, :][None, :]
        excess[k, :] = -np.inf
        excess[:, k] = -np.inf
        np.fill_diagonal(excess, -np.inf)
        for i, j in np.argwhere(excess > tol):
            violations.append((int(i), int(j), k, float(excess[i, j])))
    violations.sort()
    return MetricReport(
        nonnegativity_ok=bool((w >= 0).all()),
        identity_ok=bool((np.diag(w) == 0).all()),
        symmetry_ok=bool(np.allclose(w, w.T, rtol=0.0, atol=SYMMETRY_TOL)),
        triangle_violations=violations,
    )


class TransformResult(NamedTuple):
    network: WeightedNetwork
    verified: bool


_NAMED_PRESERVING = {
    "identity": lambda x: x,
    "sqrt": np.sqrt,
}


def metric_preserving(W: WeightedNetwork, f: Union[str, tuple, Callable] = "sqrt") -> TransformResult:
    """Apply a metric-preserving function to every weight.

    ``f`` may be ``"identity"``, ``"sqrt"``, ``("power", m)`` for ``x**(1/m)``,
    or any callable. Named functions are increasing, concave and vanish at 0,
    so metrics stay metrics; callables are applied as-is and the result is
    marked ``verified=False``.
    """
    if isinstance(f, tuple):
        name, m = f
        if name != "power" or m < 1:
            raise TopoDistError(f"unknown metric-preserving function {f!r}")
        fn, verified = (lambda x: x ** (1.0 / m)), True
    elif isinstance(f, str):
        if f not in _NAMED_PRESERVING:
            raise TopoDistError(f"unknown metric-preserving function {f!r}")
        fn, verified = _NAMED_PRESERVING[f], True
    else:
        fn, verified = f, False
    out = np.asarray(fn(np.asarray(W.weights, dtype=float)), dtype=float)
    if (out < 0).any():
        raise NegativeWeight("transformed weights contain negative values")
    return TransformResult(WeightedNetwork(out), verified)


def _same_shape(a, b):
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes differ: {a.shape} vs {b.shape}")


def norm_distance(W1: WeightedNetwork, W2: WeightedNetwork, order=2) -> float:
    """Element-wise L_l distance between two weight matrices.

    Sums run over all ordered pairs (i, j), i.e. both triangles. For l = 1
    this is twice the upper-triangle sum; for l = 2, sqrt(2) times it.
    """
    _same_shape(W1.weights, W2.weights)
    diff = np.abs(W1.weights - W2.weights)
    if order in (np.inf, "inf", "linf"):
        return float(diff.max())
    order = float(order)
    if order <= 0:
        raise TopoDistError(f"norm order must be positive, got {order}")
    if order == 1.0:
        return float(diff.sum())
    return float((diff ** order).sum() ** (1.0 / order))


def _spd_log(R, which):
    vals, vecs = np.linalg.eigh(R)
    if vals[0] <= PD_TOL:
        raise NotPositiveDefinite(which, float(vals[0]))
    return (vecs * np.log(vals)) @ vecs.T


def log_euclidean_distance(R1, R2, alpha: float = 0.0) -> float:
    """Frobenius norm of ``log(R1 + aI) - log(R2 + aI)``."""
    R1 = np.asarray(R1, dtype=float)
    R2 = np.asarray(R2, dtype=float)
    _same_shape(R1, R2)
    if alpha < 0:
        raise TopoDistError(f"alpha must be nonnegative, got {alpha}")
    eye = alpha * np.eye(R1.shape[0])
    L1 = _spd_log((R1 + R1.T) / 2 + eye, "first")
    L2 = _spd_log((R2 + R2.T) / 2 + eye, "second")
    return float(np.linalg.norm(L1 - L2, "fro"))
