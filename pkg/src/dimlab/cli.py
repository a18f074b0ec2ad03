"""Command-line surface: sample, estimate, sweep, suite.

Exit codes: 0 success, 2 user/input error, 3 I/O error, 4 infeasible
configuration.  Every command honors --seed (default 0) and is
deterministic for fixed arguments.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .bench import (SUITE_PRESETS, ExperimentPlan, preset_plan, run_suite,
                    run_sweep, write_csv)
from .estimators import METHODS, EstimatorConfig, estimate
from .geometry import CATALOG, SampleConfig, catalog_spec, sample_manifold
from .neighbors import knn_all
from .tuning import TuningError, default_grid, tuned_estimate

EXIT_OK = 0
EXIT_USER = 2
EXIT_IO = 3
EXIT_CONFIG = 4


class UserError(Exception):
    pass


def _parse_dist(text):
    if text == "uniform":
        return "uniform", (0.5, 3.0)
    if text.startswith("beta:"):
        try:
            a, b = (float(v) for v in text[5:].split(","))
        except ValueError:
            raise UserError(f"cannot parse distribution {text!r}; "
                            "expected beta:a,b")
        if a <= 0 or b <= 0:
            raise UserError("beta shapes must be positive")
        return "beta", (a, b)
    raise UserError(f"unknown distribution {text!r}")


def read_point_csv(path, delimiter=",", has_header=False) -> np.ndarray:
    """Parse a numeric CSV into an n x p matrix with precise diagnostics."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UserError(f"cannot read {path}: {exc}")
    if has_header and lines:
        lines = lines[1:]
    rows = []
    width = None
    for lineno, line in enumerate(lines, start=2 if has_header else 1):
        if not line.strip():
            continue
        cells = line.split(delimiter)
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise UserError(f"row {lineno}: expected {width} columns, "
                            f"found {len(cells)}")
        parsed = []
        for col, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise UserError(f"row {lineno}, column {col}: "
                                f"not a number: {cell.strip()!r}")
            if not np.isfinite(value):
                raise UserError(f"row {lineno}, column {col}: non-finite value")
            parsed.append(value)
        rows.append(parsed)
    if len(rows) < 2:
        raise UserError(f"{path}: need at least 2 data rows")
    return np.asarray(rows, dtype=float)


def cmd_sample(args) -> int:
    try:
        spec = catalog_spec(args.manifold)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    dist, shapes = _parse_dist(args.dist)
    cfg = SampleConfig(n=args.n, distribution=dist, beta_shapes=shapes,
                       noise_sigma=args.sigma, seed=args.seed)
    cloud = sample_manifold(spec, cfg)
    try:
        np.savetxt(args.out, cloud.points, fmt="%.17g", delimiter=",")
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def _estimate_one(X, method, args):
    if args.tune or (args.K is None and args.alpha is None):
        grid = None
        if args.grid:
            grid = [float(v) for v in args.grid.split(",")]
        report = tuned_estimate(X, method, grid_values=grid, seed=args.seed)
        window = report.diagnostics.get("window")
        return report.d_hat, window
    if method == "wasserstein":
        cfg = EstimatorConfig(method=method, alpha=args.alpha or 5.0,
                              seed=args.seed)
    elif method == "twonn":
        cfg = EstimatorConfig(method=method, seed=args.seed)
    else:
        if args.K is None:
            raise UserError(f"{method} needs --K or --tune")
        cfg = EstimatorConfig(method=method, K=args.K, seed=args.seed)
    return estimate(X, cfg).d_hat, None


def cmd_estimate(args) -> int:
    X = read_point_csv(args.input, delimiter=args.delimiter,
                       has_header=args.has_header)
    n, p = X.shape
    if args.method == "all":
        methods = [m for m in METHODS if m != "danco"]
        if args.with_danco or p <= 100:
            methods.insert(3, "danco")
    else:
        if args.method not in METHODS:
            raise UserError(f"unknown method {args.method!r}")
        methods = [args.method]
    out_lines = []
    if args.csv:
        out_lines.append("method,d_hat,window_start,window_end")
    for method in methods:
        d_hat, window = _estimate_one(X, method, args)
        if args.csv:
            w1, w2 = (window if window else ("", ""))
            out_lines.append(f"{method},{d_hat:.6g},{w1},{w2}")
        else:
            suffix = f"  window {window[0]}..{window[1]}" if window else ""
            out_lines.append(f"{method:<12} {d_hat:8.4f}{suffix}")
    print("\n".join(out_lines))
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        plan = preset_plan(args.preset, replicates=args.replicates,
                           base_seed=args.seed)
    except KeyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    rows = run_sweep(plan)
    try:
        write_csv(rows, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def cmd_suite(args) -> int:
    if args.preset:
        if args.preset not in SUITE_PRESETS:
            print(f"error: unknown suite preset {args.preset!r}", file=sys.stderr)
            return EXIT_USER
        params = dict(SUITE_PRESETS[args.preset])
    else:
        dist, shapes = _parse_dist(args.dist)
        params = dict(n=args.n, distribution=dist, noise_sigma=args.sigma)
        if dist == "beta":
            params["beta_shapes"] = shapes
    estimators = args.estimators.split(",") if args.estimators else None
    if estimators:
        for m in estimators:
            if m not in METHODS:
                print(f"error: unknown method {m!r}", file=sys.stderr)
                return EXIT_USER
        params["estimators"] = estimators
    manifolds = args.manifolds.split(",") if args.manifolds else None
    if manifolds:
        for name in manifolds:
            if name not in CATALOG:
                print(f"error: unknown manifold id {name!r}", file=sys.stderr)
                return EXIT_USER
        params["manifolds"] = manifolds
    rows = run_suite(replicates=args.replicates, base_seed=args.seed, **params)
    try:
        write_csv(rows, args.out)
    except OSError as exc:
        print(f"error: cannot write {args.out}: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dimlab",
        description="Manifold dimension estimation toolbox")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sample = sub.add_parser("sample", help="sample a catalog manifold to CSV")
    p_sample.add_argument("--manifold", required=True,
                          help="catalog id, e.g. M11")
    p_sample.add_argument("--n", type=int, required=True)
    p_sample.add_argument("--dist", default="uniform",
                          help="uniform or beta:a,b")
    p_sample.add_argument("--sigma", type=float, default=0.0,
                          help="ambient Gaussian noise std-dev")
    p_sample.add_argument("--seed", type=int, default=0)
    p_sample.add_argument("--out", required=True)
    p_sample.set_defaults(func=cmd_sample)

    p_est = sub.add_parser("estimate", help="estimate dimension of a CSV dataset")
    p_est.add_argument("--input", required=True)
    p_est.add_argument("--method", default="all",
                       help="one of %s, or 'all'" % ",".join(METHODS))
    p_est.add_argument("--tune", action="store_true",
                       help="select hyperparameters by the stability rule")
    p_est.add_argument("--K", type=int, default=None)
    p_est.add_argument("--alpha", type=float, default=None)
    p_est.add_argument("--grid", default=None,
                       help="comma-separated hyperparameter grid for --tune")
    p_est.add_argument("--seed", type=int, default=0)
    p_est.add_argument("--csv", action="store_true")
    p_est.add_argument("--delimiter", default=",")
    p_est.add_argument("--has-header", action="store_true")
    p_est.add_argument("--with-danco", action="store_true",
                       help="keep danco in --method all above 100 columns")
    p_est.set_defaults(func=cmd_estimate)

    p_sweep = sub.add_parser("sweep", help="run a factor-sweep preset")
    p_sweep.add_argument("--preset", required=True,
                         help="table-k|table-danco-k|table-alpha|table-n|"
                              "table-p|table-curvature|table-d|table-c|table-noise")
    p_sweep.add_argument("--replicates", type=int, default=None)
    p_sweep.add_argument("--seed", type=int, default=0)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(func=cmd_sweep)

    p_suite = sub.add_parser("suite", help="run the manifold catalog suite")
    p_suite.add_argument("--preset", default=None,
                         help="|".join(SUITE_PRESETS))
    p_suite.add_argument("--n", type=int, default=500)
    p_suite.add_argument("--dist", default="uniform")
    p_suite.add_argument("--sigma", type=float, default=0.0)
    p_suite.add_argument("--estimators", default=None,
                         help="comma-separated method list")
    p_suite.add_argument("--manifolds", default=None,
                         help="comma-separated catalog ids")
    p_suite.add_argument("--replicates", type=int, default=100)
    p_suite.add_argument("--seed", type=int, default=0)
    p_suite.add_argument("--out", required=True)
    p_suite.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except TuningError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USER
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
