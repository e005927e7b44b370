"""Random modular networks and the method-comparison harness.

Node ``i`` of module ``j`` (modules of size ``c = p / k``) is the module's
first column plus fresh Gaussian noise::

    y[:, c*j + i] = x[:, c*j] + N(0, sigma^2 I_n)

Every node, the anchor included, gets its own noise draw.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .distances import Feature, Method, gh_distance, network_bottleneck
from .errors import TopoDistError
from .inference import PermutationScheme, correlation_builder, ks_test, permutation_test_many
from .network import DataMatrix, norm_distance

ALPHA = 0.05
PERMUTATION_METHODS = ("l1", "l2", "linf", "bottleneck", "gh")
KS_METHODS = ("ks_beta0", "ks_beta1")
ALL_METHODS = PERMUTATION_METHODS + KS_METHODS
METHOD_LABELS = {
    "l1": "L1", "l2": "L2", "linf": "Linf", "bottleneck": "Bottle", "gh": "GH",
    "ks_beta0": "KS(beta0)", "ks_beta1": "KS(beta1)",
}


@dataclass(frozen=True)
class ModularConfig:
    p: int
    k: int
    sigma: float = 0.1
    n: int = 5
    seed: Optional[int] = None

    def __post_init__(self):
        if self.p < 1 or self.k < 1 or self.p % self.k:
            raise TopoDistError(f"module count k={self.k} must divide p={self.p}")
        if self.sigma < 0:
            raise TopoDistError(f"sigma must be nonnegative, got {self.sigma}")
        if self.n < 3:
            raise TopoDistError(f"need n >= 3 observations, got {self.n}")

    @property
    def c(self):
        return self.p // self.k


def module_anchors(p, k):
    """Column index of each node's anchor (the first node of its module)."""
    c = p // k
    return (np.arange(p) // c) * c


def generate_modular(cfg: ModularConfig, base=None, rng=None) -> DataMatrix:
    """Draw an ``n x p`` data matrix with ``k`` planted modules.

    ``base`` supplies the underlying ``n x p`` standard-normal matrix ``x``;
    passing the same ``base`` to two calls makes them share anchors. ``rng``
    overrides ``cfg.seed``.
    """
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    if base is None:
        base = rng.standard_normal((cfg.n, cfg.p))
    base = np.asarray(base, dtype=float)
    if base.shape != (cfg.n, cfg.p):
        raise TopoDistError(f"base matrix must be {cfg.n}x{cfg.p}, got {base.shape}")
    y = base[:, module_anchors(cfg.p, cfg.k)] + cfg.sigma * rng.standard_normal((cfg.n, cfg.p))
    return DataMatrix(y)


@dataclass
class ScenarioResult:
    label: str
    k1: int
    k2: int
    rejection_rates: dict
    p_values: dict = field(repr=False, default_factory=dict)

    @property
    def is_null(self):
        return self.k1 == self.k2

    @property
    def error_rates(self):
        """False-positive rate for null scenarios, false-negative rate otherwise."""
        if self.is_null:
            return dict(self.rejection_rates)
        return {m: 1.0 - r for m, r in self.rejection_rates.items()}


@dataclass
class ExperimentReport:
    p: int
    n: int
    sigma: float
    trials: int
    seed: int
    methods: list
    settings: dict
    scenarios: list

    def scenario(self, label):
        for s in self.scenarios:
            if s.label == label:
                return s
        raise KeyError(label)

    def to_dict(self):
        return {
            "p": self.p, "n": self.n, "sigma": self.sigma, "trials": self.trials,
            "seed": self.seed, "methods": list(self.methods), "settings": self.settings,
            "scenarios": [
                {
                    "label": s.label, "k1": s.k1, "k2": s.k2,
                    "kind": "false_positive" if s.is_null else "false_negative",
                    "rejection_rates": s.rejection_rates,
                    "error_rates": s.error_rates,
                }
                for s in self.scenarios
            ],
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def table_csv(self):
        """Error-rate table with one row per scenario, one column per method."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"p={self.p}"] + [METHOD_LABELS[m] for m in self.methods])
        for s in self.scenarios:
            rates = s.error_rates
            writer.writerow([s.label] + [f"{rates[m]:.2f}" for m in self.methods])
        return buf.getvalue()


def _uniform_grid(W1, W2, size):
    top = max(W1.weights.max(), W2.weights.max())
    return np.linspace(0.0, top, size)


def trial_pvalues(data1, data2, methods=ALL_METHODS, *, bottleneck_dim=0, ks_grid=None, ks_q="jumps"):
    """p-values of every requested method for one pair of group data matrices.

    Permutation methods enumerate all C(m+n, m) row splits; KS methods use
    the combinatorial p-value on the two group networks. ``ks_grid`` is
    ``None`` for the merged edge-weight grid or an int for that many uniform
    thresholds on ``[0, largest weight]``; ``ks_q`` is passed to
    :func:`ks_test`.
    """
    builder = correlation_builder()
    out = {}
    perm = [m for m in methods if m in PERMUTATION_METHODS]
    if perm:
        table = {
            "l1": lambda a, b: norm_distance(a, b, 1),
            "l2": lambda a, b: norm_distance(a, b, 2),
            "linf": lambda a, b: norm_distance(a, b, np.inf),
            "bottleneck": lambda a, b: network_bottleneck(a, b, bottleneck_dim).value,
            "gh": lambda a, b: gh_distance(a, b).value,
        }
        scheme = PermutationScheme(data1.n, data2.n)
        res = permutation_test_many(data1, data2, builder, {m: table[m] for m in perm}, scheme)
        out.update({m: r.p_value for m, r in res.items()})
    ks = [m for m in methods if m in KS_METHODS]
    if ks:
        W1, W2 = builder(data1.values), builder(data2.values)
        grid = None if ks_grid is None else _uniform_grid(W1, W2, ks_grid)
        for m in ks:
            out[m] = ks_test(W1, W2, Feature(m.split("_")[1]), grid, q=ks_q).p_value
    unknown = set(methods) - set(ALL_METHODS)
    if unknown:
        raise TopoDistError(f"unknown methods: {sorted(unknown)}")
    return out


def _trial_rng(seed, k1, k2, trial):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(k1, k2, trial)))


def draw_groups(p, k1, k2, *, n=5, sigma=0.1, seed=0, trial=0, shared_anchors=True):
    """Data matrices for one trial of scenario ``k1`` vs ``k2``.

    With ``shared_anchors`` both groups are built on the same base draw
    ``x`` and differ by their module layout and noise. Otherwise each group
    gets an independent base.
    """
    rng = _trial_rng(seed, k1, k2, trial)
    base = rng.standard_normal((n, p))
    X1 = generate_modular(ModularConfig(p, k1, sigma, n), base=base, rng=rng)
    base2 = base if shared_anchors else rng.standard_normal((n, p))
    X2 = generate_modular(ModularConfig(p, k2, sigma, n), base=base2, rng=rng)
    return X1, X2


def _run_trial(args):
    p, k1, k2, n, sigma, seed, trial, shared, methods, bdim, ks_grid, ks_q = args
    X1, X2 = draw_groups(p, k1, k2, n=n, sigma=sigma, seed=seed, trial=trial, shared_anchors=shared)
    return trial_pvalues(X1, X2, methods, bottleneck_dim=bdim, ks_grid=ks_grid, ks_q=ks_q)


def run_comparison(scenarios: Sequence[tuple], methods=ALL_METHODS, trials: int = 100, *,
                   p: int = 20, n: int = 5, sigma: float = 0.1, seed: int = 0,
                   shared_anchors: bool = True, bottleneck_dim: int = 0, ks_grid=None,
                   ks_q="jumps", threads: int = 1, progress=None) -> ExperimentReport:
    """Rejection rates at the 0.05 level for each scenario and method.

    Trial ``t`` of scenario ``(k1, k2)`` draws from a generator seeded by
    ``(seed, k1, k2, t)``, so results do not depend on ``threads`` or on
    which other scenarios run.
    """
    methods = list(methods)
    jobs = []
    for k1, k2 in scenarios:
        for t in range(trials):
            jobs.append((p, k1, k2, n, sigma, seed, t, shared_anchors, methods, bottleneck_dim,
                         ks_grid, ks_q))
    if threads > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_run_trial, jobs, chunksize=max(1, len(jobs) // (4 * threads))))
    else:
        results = []
        for i, job in enumerate(jobs):
            results.append(_run_trial(job))
            if progress is not None:
                progress(i + 1, len(jobs))

    out = []
    for s, (k1, k2) in enumerate(scenarios):
        chunk = results[s * trials:(s + 1) * trials]
        pvals = {m: [r[m] for r in chunk] for m in methods}
        rates = {m: float(np.mean(np.array(v) < ALPHA)) for m, v in pvals.items()}
        out.append(ScenarioResult(f"{k1} vs {k2}", k1, k2, rates, pvals))
    settings = {"shared_anchors": shared_anchors, "bottleneck_dim": bottleneck_dim,
                "ks_grid": ks_grid if ks_grid is not None else "merged",
                "ks_q": ks_q if ks_q is not None else "grid", "alpha": ALPHA,
                "permutations": "exact"}
    return ExperimentReport(p, n, sigma, trials, seed, methods, settings, out)
