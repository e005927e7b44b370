"""Command-line front end.

Exit codes: 0 on success, 2 on bad input, 3 on numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import io
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .distances import Feature, Method, compute_distance
from .errors import NumericalError, TopoDistError
from .filtration import betti_curve, persistence_diagram
from .inference import (
    PermutationScheme,
    asymptotic_ks_pvalue,
    correlation_builder,
    ks_tail_probability,
    permutation_test,
)
from .io import read_matrix, read_network, twin_files, write_matrix
from .network import DataMatrix, WeightTransform, log_euclidean_distance
from .simulate import ALL_METHODS, run_comparison
from .twins import (
    HERITABILITY_GRID,
    TwinPair,
    clamp_hi,
    cosine_series_fit,
    falconer_hi,
    heritability_ks,
    twin_group_correlation,
)

THREADS_ENV = "TOPODIST_THREADS"


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class RunManifest:
    command: str
    parameters: dict
    seed: object = None
    version: str = __version__
    inputs: dict = field(default_factory=dict)
    started: float = None  # perf_counter at start; set only with --timing

    def add_input(self, path):
        if os.path.isdir(path):
            for name in sorted(os.listdir(path)):
                self.add_input(os.path.join(path, name))
        else:
            self.inputs[path] = _sha256(path)

    def to_dict(self):
        out = {"command": self.command, "parameters": self.parameters, "seed": self.seed,
               "version": self.version, "inputs": self.inputs}
        if self.started is not None:
            out["wall_time"] = round(time.perf_counter() - self.started, 6)
        return out


def _jsonable(x):
    # JSON has no infinity; spell it out.
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def _dump(obj):
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _emit(args, text):
    if getattr(args, "out", None):
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _emit_with_sidecar(args, text, manifest):
    # Tabular outputs keep the manifest beside them: <out>.manifest.json, or
    # stderr when writing to stdout.
    _emit(args, text)
    if getattr(args, "out", None):
        with open(args.out + ".manifest.json", "w") as fh:
            fh.write(_dump(manifest.to_dict()))
    else:
        sys.stderr.write(_dump(manifest.to_dict()))


def _threads(args):
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise TopoDistError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    return 1


def _params(args, *skip):
    drop = {"func", "timing", "out", "threads", *skip}
    return {k: v for k, v in sorted(vars(args).items()) if k not in drop}


# -- commands -------------------------------------------------------------

def cmd_dist(args, manifest):
    method = Method(args.method)
    if method is Method.LOG_EUCLIDEAN:
        R1, R2 = read_matrix(args.first, args.header), read_matrix(args.second, args.header)
        d = {"value": log_euclidean_distance(R1, R2, args.alpha), "method": method.value,
             "feature": None, "argmax": None}
    else:
        W1, W2 = read_network(args.first, args.header), read_network(args.second, args.header)
        d = compute_distance(W1, W2, method, feature=args.feature, dimension=args.dimension).to_dict()
    d["manifest"] = manifest.to_dict()
    _emit(args, _dump(d))


def _grid_for(W, size):
    if size is None:
        return None
    top = max(1.0, float(W.weights.max()))
    return np.linspace(0.0, top, size)


def cmd_betti(args, manifest):
    W = read_network(args.network, args.header)
    curve = betti_curve(W, _grid_for(W, args.grid))
    buf = io.StringIO()
    curve.write_csv(buf)
    if args.svg:
        _step_plot(curve, args.svg)
    _emit_with_sidecar(args, buf.getvalue(), manifest)


def _step_plot(curve, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    with matplotlib.rc_context({"svg.hashsalt": "topodist", "svg.fonttype": "none"}):
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.step(curve.grid, curve.beta0, where="post", label="beta0")
        ax.step(curve.grid, curve.beta1, where="post", label="beta1")
        ax.set_xlabel("epsilon")
        ax.set_ylabel("Betti number")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)


def cmd_pd(args, manifest):
    W = read_network(args.network, args.header)
    buf = io.StringIO()
    persistence_diagram(W, args.dimension).write_csv(buf)
    _emit_with_sidecar(args, buf.getvalue(), manifest)


def cmd_pvalue(args, manifest):
    if args.exact is not None:
        d, q = args.exact
        frac = ks_tail_probability(d, int(q))
        out = {"p_value": frac.numerator / frac.denominator, "fraction": f"{frac.numerator}/{frac.denominator}",
               "method": "exact", "d": d, "q": int(q)}
    else:
        D, q = args.asymptotic
        out = {"p_value": asymptotic_ks_pvalue(D, int(q)), "method": "asymptotic", "d": D, "q": int(q)}
    out["manifest"] = manifest.to_dict()
    _emit(args, _dump(out))


def _perm_distance(method, feature, dimension):
    method = Method(method)
    if method is Method.LOG_EUCLIDEAN:
        raise TopoDistError("log-Euclidean distance needs correlation matrices, not networks")

    def dist(W1, W2):
        return compute_distance(W1, W2, method, feature=feature, dimension=dimension)

    return dist


def cmd_permtest(args, manifest):
    X1 = DataMatrix(read_matrix(args.first, args.header))
    X2 = DataMatrix(read_matrix(args.second, args.header))
    if args.perms:
        scheme = PermutationScheme(X1.n, X2.n, "monte_carlo", args.perms, args.seed)
    else:
        scheme = PermutationScheme(X1.n, X2.n)
    res = permutation_test(X1, X2, correlation_builder(WeightTransform(args.transform)),
                           _perm_distance(args.method, args.feature, args.dimension), scheme)
    out = res.to_dict()
    out["method"] = args.method
    out["mode"] = scheme.mode
    out["manifest"] = manifest.to_dict()
    _emit(args, _dump(out))


def _pair(text):
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected two integers like 4,5, got {text!r}") from None
    return a, b


def cmd_simulate(args, manifest):
    scenarios = args.groups or [(4, 4), (5, 5), (10, 10)]
    methods = args.methods.split(",") if args.methods else list(ALL_METHODS)
    for k1, k2 in scenarios:
        if args.p % k1 or args.p % k2:
            raise TopoDistError(f"module counts {k1},{k2} must divide p={args.p}")
    report = run_comparison(scenarios, methods, args.trials, p=args.p, n=args.n, sigma=args.sigma,
                            seed=args.seed, shared_anchors=not args.independent_anchors,
                            bottleneck_dim=args.dimension, threads=_threads(args))
    if args.table:
        with open(args.table, "w", newline="") as fh:
            fh.write(report.table_csv())
    out = report.to_dict()
    out["manifest"] = manifest.to_dict()
    _emit(args, _dump(out))


def _twin_group(directory, header):
    pairs = [TwinPair(read_matrix(a, header), read_matrix(b, header)) for a, b in twin_files(directory)]
    return twin_group_correlation(pairs)


def cmd_heritability(args, manifest):
    mz, dz = _twin_group(args.mz, args.header), _twin_group(args.dz, args.header)
    grid = np.linspace(0.0, 1.0, args.grid) if args.grid != 101 else HERITABILITY_GRID
    tests = heritability_ks(mz, dz, grid)
    hi = falconer_hi(mz, dz)
    if args.hi_out:
        write_matrix(args.hi_out, np.nan_to_num(clamp_hi(hi), nan=0.0))
    iu = np.triu_indices(hi.shape[0], k=1)
    out = {"mz_pairs": mz.pairs, "dz_pairs": dz.pairs,
           "mean_hi": float(np.nanmean(clamp_hi(hi)[iu])),
           "ks": {name: r.to_dict() for name, r in tests.items()},
           "manifest": manifest.to_dict()}
    _emit(args, _dump(out))


def cmd_fit_cosine(args, manifest):
    series = read_matrix(args.input, args.header)
    coef = np.column_stack([cosine_series_fit(series[:, j], args.k, args.center)
                            for j in range(series.shape[1])])
    write_matrix(args.output, coef)
    with open(args.output + ".manifest.json", "w") as fh:
        fh.write(_dump(manifest.to_dict()))


# -- parser ---------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--header", action="store_true", help="skip one header row in input CSVs")
    common.add_argument("--threads", type=int, default=None,
                        help=f"worker processes (default: ${THREADS_ENV} or 1)")
    common.add_argument("--timing", action="store_true", help="record wall time in the manifest")

    parser = argparse.ArgumentParser(prog="topodist", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    methods = [m.value for m in Method]
    features = [f.value for f in Feature]

    p = sub.add_parser("dist", parents=[common], help="distance between two networks")
    p.add_argument("--method", choices=methods, required=True)
    p.add_argument("--feature", choices=features, default="beta0")
    p.add_argument("--dimension", type=int, choices=(0, 1), default=0)
    p.add_argument("--alpha", type=float, default=0.0, help="ridge for log-Euclidean")
    p.add_argument("--out")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_dist, inputs=("first", "second"))

    p = sub.add_parser("betti", parents=[common], help="Betti curve CSV")
    p.add_argument("--grid", type=int, help="uniform grid size on [0, max(1, largest weight)]")
    p.add_argument("--svg", help="also write a step plot here")
    p.add_argument("--out")
    p.add_argument("network")
    p.set_defaults(func=cmd_betti, inputs=("network",))

    p = sub.add_parser("pd", parents=[common], help="persistence diagram CSV")
    p.add_argument("--dimension", type=int, choices=(0, 1), default=0)
    p.add_argument("--out")
    p.add_argument("network")
    p.set_defaults(func=cmd_pd, inputs=("network",))

    p = sub.add_parser("pvalue", parents=[common], help="KS p-value")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--exact", nargs=2, type=float, metavar=("D", "Q"))
    g.add_argument("--asymptotic", nargs=2, type=float, metavar=("D", "Q"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_pvalue, inputs=())

    p = sub.add_parser("permtest", parents=[common], help="two-sample permutation test")
    p.add_argument("--method", choices=[m for m in methods if m != "logeuclid"], default="l2")
    p.add_argument("--feature", choices=features, default="beta0")
    p.add_argument("--dimension", type=int, choices=(0, 1), default=0)
    p.add_argument("--transform", choices=[t.value for t in WeightTransform], default="sqrt-one-minus")
    p.add_argument("--perms", type=int, default=0, help="random permutations (0: enumerate all)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_permtest, inputs=("first", "second"))

    p = sub.add_parser("simulate", parents=[common], help="modular-network method comparison")
    p.add_argument("--p", type=int, default=20)
    p.add_argument("--groups", type=_pair, action="append", help="k1,k2 (repeatable)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--sigma", type=float, default=0.1)
    p.add_argument("--methods", help=f"comma list from {','.join(ALL_METHODS)}")
    p.add_argument("--dimension", type=int, choices=(0, 1), default=0, help="bottleneck diagram dimension")
    p.add_argument("--independent-anchors", action="store_true",
                   help="draw a separate base matrix for each group")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--table", help="also write the error-rate table as CSV")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate, inputs=())

    p = sub.add_parser("heritability", parents=[common], help="twin heritability KS test")
    p.add_argument("--mz", required=True, help="directory of <id>_1.csv/<id>_2.csv pairs")
    p.add_argument("--dz", required=True)
    p.add_argument("--grid", type=int, default=101)
    p.add_argument("--hi-out", help="write the clamped heritability matrix here")
    p.add_argument("--out")
    p.set_defaults(func=cmd_heritability, inputs=("mz", "dz"))

    p = sub.add_parser("fit-cosine", parents=[common], help="cosine-series coefficients per column")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--center", action="store_true")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_fit_cosine, inputs=("input",))
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter() if args.timing else None
    try:
        manifest = RunManifest(args.command, _params(args, "inputs"), getattr(args, "seed", None),
                               started=start)
        for name in args.inputs:
            manifest.add_input(getattr(args, name))
        args.func(args, manifest)
    except NumericalError as exc:
        print(f"topodist: numerical error: {exc}", file=sys.stderr)
        return 3
    except (TopoDistError, OSError) as exc:
        msg = exc if not isinstance(exc, OSError) else f"{exc.filename}: {exc.strerror}"
        print(f"topodist: {msg}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
