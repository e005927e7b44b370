"""Twin heritability pipeline: edge-level twin correlations, Falconer's index,
KS tests between MZ and DZ correlation filtrations, and cosine-series smoothing
of node time series.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distances import Feature
from .errors import DegreeTooHigh, DimensionMismatch, TooFewPairs, TopoDistError
from .inference import TestResult, ks_test
from .network import WeightedNetwork

HERITABILITY_GRID = np.linspace(0.0, 1.0, 101)


@dataclass(frozen=True)
class TwinPair:
    first: np.ndarray
    second: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.first, dtype=float)
        b = np.asarray(self.second, dtype=float)
        if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"twin matrices must be equal-size squares, got {a.shape} and {b.shape}")
        object.__setattr__(self, "first", a)
        object.__setattr__(self, "second", b)


@dataclass(frozen=True)
class GroupCorrelation:
    """Symmetrized edge-wise twin correlation matrix of one zygosity group.

    Entries whose input was constant across pairs (e.g. the diagonal of
    correlation matrices) are NaN.
    """

    matrix: np.ndarray
    pairs: int


def twin_group_correlation(pairs: Sequence[TwinPair]) -> GroupCorrelation:
    """Correlate twin 1's ``c_ij`` with twin 2's ``c_ij`` across pairs, per edge.

    The cross-correlation is not symmetric in (i, j), so the result is
    averaged with its transpose.
    """
    if len(pairs) < 3:
        raise TooFewPairs(f"need at least 3 twin pairs, got {len(pairs)}")
    shape = pairs[0].first.shape
    if any(tp.first.shape != shape for tp in pairs):
        raise DimensionMismatch("twin matrices differ in size across pairs")
    a = np.stack([tp.first for tp in pairs])
    b = np.stack([tp.second for tp in pairs])
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    denom = np.sqrt((a * a).sum(axis=0) * (b * b).sum(axis=0))
    with np.errstate(invalid="ignore", divide="ignore"):
        c = np.where(denom > 0, (a * b).sum(axis=0) / denom, np.nan)
    return GroupCorrelation((c + c.T) / 2, len(pairs))


def falconer_hi(c_mz, c_dz) -> np.ndarray:
    """Heritability index 2 (C_MZ - C_DZ), element-wise, unclamped."""
    mz = c_mz.matrix if isinstance(c_mz, GroupCorrelation) else np.asarray(c_mz, dtype=float)
    dz = c_dz.matrix if isinstance(c_dz, GroupCorrelation) else np.asarray(c_dz, dtype=float)
    if mz.shape != dz.shape:
        raise DimensionMismatch(f"group matrices differ in shape: {mz.shape} vs {dz.shape}")
    return 2.0 * (mz - dz)


def clamp_hi(hi) -> np.ndarray:
    """Report view of the heritability index, clipped to [0, 1]."""
    return np.clip(hi, 0.0, 1.0)


def _correlation_network(c):
    c = np.array(c.matrix if isinstance(c, GroupCorrelation) else c, dtype=float)
    np.fill_diagonal(c, 0.0)
    if np.isnan(c).any():
        raise TopoDistError("group correlation has undefined off-diagonal entries")
    return WeightedNetwork(c, signed=True)


def heritability_ks(c_mz, c_dz, grid=HERITABILITY_GRID) -> dict:
    """KS tests between MZ and DZ correlation filtrations on beta0 and beta1.

    Filtrations are built on the correlations themselves (edges kept where
    c > eps). KS on a monotone feature is unchanged by any strictly monotone
    relabelling of the weights, so no conversion to a metric is needed.
    """
    W_mz, W_dz = _correlation_network(c_mz), _correlation_network(c_dz)
    if W_mz.node_count != W_dz.node_count:
        raise DimensionMismatch("MZ and DZ matrices differ in size")
    return {f.value: ks_test(W_mz, W_dz, f, grid) for f in (Feature.BETA0, Feature.BETA1)}


def synthetic_twin_pairs(n_pairs, p, heritability, zygosity, rng) -> list:
    """Twin connectivity matrices with a planted additive-genetic share.

    Each edge value is ``sqrt(h) G + sqrt(1 - h) E`` with unit-variance
    genetic and unique parts. MZ twins share G; DZ twins share half of its
    variance. Edge-wise twin correlations are then h (MZ) and h/2 (DZ), so
    the Falconer index recovers h.
    """
    h = np.broadcast_to(np.asarray(heritability, dtype=float), (p, p))
    h = (h + h.T) / 2
    share = {"mz": 1.0, "dz": 0.5}[zygosity]
    iu = np.triu_indices(p, k=1)

    def sym(v):
        m = np.zeros((p, p))
        m[iu] = v
        return m + m.T

    hu = h[iu]
    pairs = []
    for _ in range(n_pairs):
        common = rng.standard_normal(hu.size)
        g1 = np.sqrt(share) * common + np.sqrt(1 - share) * rng.standard_normal(hu.size)
        g2 = np.sqrt(share) * common + np.sqrt(1 - share) * rng.standard_normal(hu.size)
        e1, e2 = rng.standard_normal((2, hu.size))
        c1 = np.sqrt(hu) * g1 + np.sqrt(1 - hu) * e1
        c2 = np.sqrt(hu) * g2 + np.sqrt(1 - hu) * e2
        pairs.append(TwinPair(sym(c1), sym(c2)))
    return pairs


def cosine_basis(t, k):
    """Columns 1, sqrt(2) cos(pi t), ..., sqrt(2) cos(k pi t) evaluated at ``t``."""
    t = np.asarray(t, dtype=float)
    basis = np.sqrt(2.0) * np.cos(np.pi * np.outer(t, np.arange(k + 1)))
    basis[:, 0] = 1.0
    return basis


def cosine_series_fit(signal, k: int, center: bool = False) -> np.ndarray:
    """Least-squares cosine-series coefficients c_0..c_k.

    Samples are taken to sit on a uniform grid over [0, 1]. With ``center``
    the time mean is removed first.
    """
    y = np.asarray(signal, dtype=float).ravel()
    if k < 0:
        raise DegreeTooHigh(f"degree must be nonnegative, got {k}")
    if y.size <= k + 1:
        raise DegreeTooHigh(f"degree {k} needs more than {k + 1} samples, got {y.size}")
    if center:
        y = y - y.mean()
    t = np.linspace(0.0, 1.0, y.size)
    coef, *_ = np.linalg.lstsq(cosine_basis(t, k), y, rcond=None)
    return coef


def cosine_series_eval(coefficients, t):
    coefficients = np.asarray(coefficients, dtype=float)
    return cosine_basis(t, coefficients.size - 1) @ coefficients
