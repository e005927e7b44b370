"""Permutation tests and the combinatorial KS p-value."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping, Optional

import numpy as np

from .distances import DistanceValue, Feature, Method, feature_curves
from .errors import CapExceeded, DimensionMismatch, TooFewRows, TopoDistError
from .network import DataMatrix, WeightTransform, WeightedNetwork, correlation_network, standardize

DEFAULT_CAP = 10**6
EXACT_KS_LIMIT = 10**4


@dataclass(frozen=True)
class PermutationScheme:
    """How to enumerate group relabellings.

    ``mode="exact"`` walks all C(m+n, m) splits; ``mode="monte_carlo"`` draws
    ``count`` random permutations from ``seed``.
    """

    m: int
    n: int
    mode: str = "exact"
    count: int = 0
    seed: Optional[int] = None
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.mode not in ("exact", "monte_carlo"):
            raise TopoDistError(f"unknown permutation mode {self.mode!r}")
        if self.mode == "monte_carlo" and (self.count < 1 or self.seed is None):
            raise TopoDistError("monte_carlo mode needs a positive count and a seed")
        if self.mode == "exact" and self.total > self.cap:
            raise CapExceeded(
                f"C({self.m + self.n}, {self.m}) = {self.total} splits exceeds cap {self.cap}")

    @property
    def total(self):
        return math.comb(self.m + self.n, self.m)

    def splits(self):
        """Yield index arrays for the first group, lexicographic in exact mode."""
        N = self.m + self.n
        if self.mode == "exact":
            for combo in itertools.combinations(range(N), self.m):
                yield np.array(combo)
        else:
            rng = np.random.default_rng(self.seed)
            for _ in range(self.count):
                yield np.sort(rng.permutation(N)[: self.m])


@dataclass(frozen=True)
class TestResult:
    observed: DistanceValue
    p_value: float
    null_samples: Optional[np.ndarray] = field(default=None, repr=False)
    permutations_used: int = 0

    __test__ = False  # not a pytest class

    def to_dict(self):
        out = self.observed.to_dict()
        out.update(p_value=self.p_value, permutations_used=self.permutations_used)
        return out


def correlation_builder(transform=WeightTransform.SQRT_ONE_MINUS):
    """Weight builder: standardize the rows given, then correlate columns."""

    def build(values):
        return correlation_network(standardize(DataMatrix(values)), transform)

    build.min_rows = 3
    return build


def _count_at_least(null, observed):
    # Recomputing the observed split can differ in the last bit; treat
    # near-equal values as ties.
    tol = 1e-12 * max(1.0, abs(observed))
    return int(np.count_nonzero(null >= observed - tol))


def permutation_test_many(X1, X2, weight_builder: Callable, distances: Mapping[str, Callable],
                          scheme: PermutationScheme, keep_null: bool = False) -> dict:
    """Run one permutation scheme for several distances at once.

    Each split rebuilds both networks once and evaluates every distance on
    them. Exact p-values count null distances >= observed over all splits
    (the identity split included); Monte-Carlo p-values are (b + 1)/(N + 1).
    """
    v1 = np.asarray(X1.values if isinstance(X1, DataMatrix) else X1, dtype=float)
    v2 = np.asarray(X2.values if isinstance(X2, DataMatrix) else X2, dtype=float)
    if v1.shape[1] != v2.shape[1]:
        raise DimensionMismatch(f"groups have {v1.shape[1]} and {v2.shape[1]} nodes")
    m, n = v1.shape[0], v2.shape[0]
    if (scheme.m, scheme.n) != (m, n):
        raise DimensionMismatch(f"scheme is for {scheme.m}+{scheme.n} rows, data has {m}+{n}")
    min_rows = getattr(weight_builder, "min_rows", 2)
    if min(m, n) < min_rows:
        raise TooFewRows(f"each group needs at least {min_rows} rows, got {m} and {n}")

    pooled = np.vstack((v1, v2))
    everyone = np.arange(m + n)

    def evaluate(first):
        rest = np.setdiff1d(everyone, first, assume_unique=True)
        W1, W2 = weight_builder(pooled[first]), weight_builder(pooled[rest])
        return [d(W1, W2) for d in distances.values()]

    observed = [_as_distance(v, name) for v, name in zip(evaluate(np.arange(m)), distances)]
    null = np.array([[float(v) for v in evaluate(first)] for first in scheme.splits()])
    null = null.reshape(-1, len(distances))
    used = null.shape[0]

    results = {}
    for col, name in enumerate(distances):
        b = _count_at_least(null[:, col], observed[col].value)
        if scheme.mode == "exact":
            p = b / used
        else:
            p = (b + 1) / (used + 1)
        results[name] = TestResult(observed[col], p, null[:, col].copy() if keep_null else None, used)
    return results


def _as_distance(value, name):
    if isinstance(value, DistanceValue):
        return value
    method = Method(name) if name in Method._value2member_map_ else None
    return DistanceValue(float(value), method)


def permutation_test(X1, X2, weight_builder: Callable, distance: Callable,
                     scheme: PermutationScheme, keep_null: bool = False) -> TestResult:
    """Two-sample permutation test of a network distance.

    ``weight_builder`` maps a block of rows to a :class:`WeightedNetwork`;
    ``distance`` maps two networks to a number (or :class:`DistanceValue`).
    """
    return permutation_test_many(X1, X2, weight_builder, {"distance": distance},
                                 scheme, keep_null)["distance"]


DP_WORK_LIMIT = 2_000_000


def band_path_count(d: int, q: int) -> int:
    """A_{q,q}: monotone lattice paths (0,0) -> (q,q) staying in |u - v| < d.

    Dynamic program over the band. Each lattice row is a running sum of the
    previous one; cells outside the band stay 0. Exact Python ints.
    """
    row = [1 if 0 < v < d else 0 for v in range(q + 1)]
    for u in range(1, q + 1):
        lo, hi = max(0, u - d + 1), min(q, u + d - 1)
        if lo == 0:
            row[0 : hi + 1] = itertools.accumulate([1] + row[1 : hi + 1])
        else:
            row[lo - 1] = 0
            row[lo : hi + 1] = itertools.accumulate(row[lo : hi + 1])
    return row[q]


def band_path_count_reflection(d: int, q: int) -> int:
    """Same count by repeated reflection across the two band edges.

    sum over k of (-1)^k C(2q, q + k d); exact and O(q / d) binomials.
    """
    total = math.comb(2 * q, q)
    k = 1
    while k * d <= q:
        total += 2 * (-1) ** k * math.comb(2 * q, q + k * d)
        k += 1
    return total


def _tail_counts(d, q, method):
    # (paths leaving the band, all paths), or None when d settles it.
    if q < 1:
        raise TopoDistError(f"q must be positive, got {q}")
    if d <= 0:
        return 1, 1
    if d > q:
        return 0, 1
    if method == "auto":
        method = "dp" if q * (2 * d - 1) <= DP_WORK_LIMIT else "reflection"
    if method == "dp":
        inside = band_path_count(d, q)
    elif method == "reflection":
        inside = band_path_count_reflection(d, q)
    else:
        raise TopoDistError(f"unknown counting method {method!r}")
    total = math.comb(2 * q, q)
    return total - inside, total


def ks_tail_probability(d, q: int, method: str = "auto") -> Fraction:
    """Exact P(D_q >= d) = 1 - A_{q,q} / C(2q, q) as a fraction.

    Non-integer ``d`` is rounded up. ``method`` picks the counting route:
    ``"dp"``, ``"reflection"``, or ``"auto"`` (the DP unless its band work
    exceeds ``DP_WORK_LIMIT`` cells). Both routes are exact and agree.
    """
    return Fraction(*_tail_counts(math.ceil(d), q, method))


def exact_ks_pvalue(d, q: int, method: str = "auto") -> float:
    outside, total = _tail_counts(math.ceil(d), q, method)
    return outside / total  # int true division rounds correctly


def asymptotic_ks_pvalue(D, q: int, terms: int = 5) -> float:
    """Kolmogorov tail 2 * sum (-1)^(i-1) exp(-2 i^2 d^2) at d = D / sqrt(2q)."""
    if q < 1:
        raise TopoDistError(f"q must be positive, got {q}")
    d = D / math.sqrt(2 * q)
    s = 2.0 * sum((-1) ** (i - 1) * math.exp(-2.0 * i * i * d * d) for i in range(1, terms + 1))
    return min(1.0, max(0.0, s))


def ks_pvalue(D, q: int, exact_limit: int = EXACT_KS_LIMIT) -> float:
    if q <= exact_limit:
        return exact_ks_pvalue(math.ceil(D), q)
    return asymptotic_ks_pvalue(D, q)


def ks_test(W1: WeightedNetwork, W2: WeightedNetwork, feature=Feature.BETA0, grid=None,
            q=None, exact_limit: int = EXACT_KS_LIMIT) -> TestResult:
    """KS distance on a filtration grid with its combinatorial p-value.

    ``q`` is the lattice size used for the p-value. ``None`` takes the grid
    size. ``"jumps"`` takes the number of unit steps the feature makes over
    the grid (the larger of the two curves), which treats each curve as an
    empirical distribution of its jump locations; for beta0 on a connected
    p-node network this is p - 1. No resampling is done.
    """
    grid, f1, f2 = feature_curves(W1, W2, feature, grid)
    gaps = np.abs(f1 - f2)
    t = int(np.argmax(gaps))
    obs = DistanceValue(float(gaps[t]), Method.KS, Feature(feature), float(grid[t]))
    if q is None:
        q = len(grid)
    elif q == "jumps":
        q = max(1, int(abs(f1[0] - f1[-1])), int(abs(f2[0] - f2[-1])))
    return TestResult(obs, ks_pvalue(obs.value, int(q), exact_limit), None, 0)
