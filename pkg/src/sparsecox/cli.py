"""Command-line front end: fit / simulate / bench / path.

Exit codes: 0 success, 1 input or runtime error, 2 fit did not converge
(the result file is still written).
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .data import (FORMAT_DENSE, FORMAT_SPARSE, load_dataset, save_dataset,
                   standardize)
from .bar import BarConfig, fit_bar, path_over
from .screening import sjs_coxbar
from .sim import MethodConfig, SimScenario, run_benchmark, simulate


def detect_design_format(path):
    """sparse-coord files start with an 'n p nnz' integer triple."""
    with open(path, "rt", encoding="utf-8") as fh:
        first = fh.readline().split()
    if len(first) == 3:
        try:
            [int(tok) for tok in first]
            return FORMAT_SPARSE
        except ValueError:
            pass
    return FORMAT_DENSE


def parse_grid(spec):
    """Grid syntax: 'a:b:logN' / 'a:b:linN' or a comma list of values."""
    if ":" in spec:
        lo, hi, kind = spec.split(":")
        lo, hi = float(lo), float(hi)
        if kind.startswith("log"):
            return np.logspace(np.log10(lo), np.log10(hi), int(kind[3:]))
        if kind.startswith("lin"):
            return np.linspace(lo, hi, int(kind[3:]))
        raise ValueError(f"unknown grid kind in {spec!r}")
    return np.asarray([float(tok) for tok in spec.split(",") if tok.strip()])


def _add_tuning_flags(sub):
    sub.add_argument("--xi", type=float, default=1.0)
    sub.add_argument("--lambda", dest="lam", type=float, default=None)
    sub.add_argument("--lambda-rule", dest="lambda_rule",
                     choices=["bic", "cbic", "fixed"], default="bic")
    sub.add_argument("--d", type=float, default=0.0)
    sub.add_argument("--screen-m", dest="screen_m", type=int, default=None)


def _bar_config(args):
    rule = args.lambda_rule
    if args.lam is not None:
        rule = "fixed"
    return BarConfig(xi=args.xi, lambda_rule=rule, lambda_value=args.lam, d=args.d)


def _load(args):
    fmt = args.format
    if fmt in (None, "auto"):
        fmt = detect_design_format(args.design)
    ds = load_dataset(args.surv, args.design, fmt)
    if args.standardize != "none":
        ds = standardize(ds, args.standardize)
    return ds


def cmd_fit(args):
    ds = _load(args)
    config = _bar_config(args)
    if args.screen_m is not None:
        fit = sjs_coxbar(ds, args.screen_m, config)
    else:
        fit = fit_bar(ds, config)
    payload = {
        "coefficients": {str(int(j) + 1): float(fit.beta[j]) for j in fit.support},
        "support": [int(j) + 1 for j in fit.support],
        "loglik": fit.loglik,
        "df": fit.df,
        "aic": fit.aic,
        "bic": fit.bic,
        "cbic": fit.cbic,
        "iterations": {"outer": fit.outer_iterations, "sweeps": fit.sweeps},
        "converged": bool(fit.converged),
        "config": {
            "xi": args.xi,
            "lambda": fit.lam,
            "lambda_rule": config.lambda_rule,
            "d": args.d,
            "screen_m": args.screen_m,
            "standardize": args.standardize,
        },
        "version": __version__,
    }
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "wt", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if fit.converged else 2


def cmd_simulate(args):
    scenario = SimScenario.from_config(args.scenario)
    if args.seed is not None:
        scenario.seed = args.seed
    ds = simulate(scenario)
    fmt = args.format
    if fmt in (None, "auto"):
        density = ds.design.nnz() / max(ds.n * ds.p, 1)
        fmt = FORMAT_SPARSE if density < 0.5 else FORMAT_DENSE
    save_dataset(ds, args.out_surv, args.out_design, fmt)
    realized = 1.0 - ds.event_count / ds.n
    print(f"realized censoring rate: {realized:.4f}")
    return 0


def cmd_bench(args):
    if args.reps < 1:
        raise ValueError("--reps must be >= 1")
    scenario = SimScenario.from_config(args.scenario)
    method = MethodConfig.from_name(args.method, lam=args.lam, xi=args.xi,
                                    d=args.d, screen_m=args.screen_m)
    seed = args.seed if args.seed is not None else scenario.seed
    report = run_benchmark(scenario, method, args.reps, seed, threads=args.threads)
    report.to_csv(args.out)
    print(f"wrote {args.out} ({report.reps} replicates, {len(report.failures)} failed)")
    return 0


def cmd_path(args):
    if args.scenario:
        scenario = SimScenario.from_config(args.scenario)
        if args.seed is not None:
            scenario.seed = args.seed
        ds = simulate(scenario)
    else:
        if not (args.surv and args.design):
            raise ValueError("path needs either --scenario or --surv/--design")
        ds = _load(args)
    grid = np.sort(parse_grid(args.grid))
    path = path_over(ds, args.axis, grid, _bar_config(args), threads=args.threads)
    path.to_csv(args.out)
    failed = sum(e is not None for e in path.errors)
    print(f"wrote {args.out} ({grid.size} grid points, {failed} failed)")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="sparsecox",
        description="Sparse Cox regression via iteratively reweighted ridge",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    fit = subs.add_parser("fit", help="fit one dataset, write a JSON result")
    fit.add_argument("--surv", required=True)
    fit.add_argument("--design", required=True)
    fit.add_argument("--format", choices=["auto", FORMAT_DENSE, FORMAT_SPARSE], default="auto")
    fit.add_argument("--standardize", choices=["none", "scale-only", "center-and-scale"],
                     default="none")
    _add_tuning_flags(fit)
    fit.add_argument("--out", default=None)
    fit.add_argument("--seed", type=int, default=None, help="accepted for interface "
                     "uniformity; fitting is deterministic")
    fit.add_argument("--threads", type=int, default=1)
    fit.set_defaults(func=cmd_fit)

    sim = subs.add_parser("simulate", help="draw a dataset from a scenario file")
    sim.add_argument("--scenario", required=True)
    sim.add_argument("--out-surv", required=True)
    sim.add_argument("--out-design", required=True)
    sim.add_argument("--format", choices=["auto", FORMAT_DENSE, FORMAT_SPARSE], default="auto")
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--threads", type=int, default=1)
    sim.set_defaults(func=cmd_simulate)

    bench = subs.add_parser("bench", help="replicate benchmark, write a report CSV")
    bench.add_argument("--scenario", required=True)
    bench.add_argument("--method", required=True)
    bench.add_argument("--reps", type=int, required=True)
    _add_tuning_flags(bench)
    bench.add_argument("--seed", type=int, default=None)
    bench.add_argument("--threads", type=int, default=1)
    bench.add_argument("--out", required=True)
    bench.set_defaults(func=cmd_bench)

    path = subs.add_parser("path", help="solution path over a tuning grid")
    path.add_argument("--scenario", default=None)
    path.add_argument("--surv", default=None)
    path.add_argument("--design", default=None)
    path.add_argument("--format", choices=["auto", FORMAT_DENSE, FORMAT_SPARSE], default="auto")
    path.add_argument("--standardize", choices=["none", "scale-only", "center-and-scale"],
                      default="none")
    path.add_argument("--axis", choices=["lambda", "xi"], required=True)
    path.add_argument("--grid", required=True)
    _add_tuning_flags(path)
    path.add_argument("--seed", type=int, default=None)
    path.add_argument("--threads", type=int, default=1)
    path.add_argument("--out", required=True)
    path.set_defaults(func=cmd_path)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
