"""Command line entry point: ``fppfluct <subcommand> [flags]``.

Every subcommand prints its report as CSV on stdout (``gauss-check``
prints JSON); ``--out PREFIX`` also writes PREFIX.csv and PREFIX.json.
Exit status: 0 success, 1 invalid configuration, 2 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time

from .errors import InvalidParameter, WindowOverflow
from .harness.config import ExperimentConfig, load_config
from .harness.experiments import EXPERIMENTS, gauss_check, simulate
from .harness.report import ExperimentReport, version_string
from .harness.seeds import replica_rng
from .harness.stats import bootstrap_slope_ci, exponent_fit

NEEDS_N = {"simulate", "confinement", "min-cyl", "torus-moments", "growth-check", "calibrate-a"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _common(p: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    p.add_argument("--config", default=None, help="JSON file of ExperimentConfig fields")
    p.add_argument("--n", type=int, nargs="+", default=S, help="system sizes")
    p.add_argument("--replicas", type=int, default=S)
    p.add_argument("--seed", type=str, default=S, help="master seed, decimal or 0x-hex")
    p.add_argument("--c", type=float, default=S, help="quantile level for spreads, in (0, 1/2)")
    p.add_argument("--K", type=int, default=S, help="cylinder height")
    p.add_argument("--alpha", type=float, nargs="+", default=S)
    p.add_argument("--alpha1", type=float, default=S)
    p.add_argument("--alpha2", type=float, default=S)
    p.add_argument("--k", type=int, nargs="+", default=S, help="moment orders")
    p.add_argument("--geometry", choices=["square", "tube", "torus", "cylinder"], default=S)
    p.add_argument("--window-factor", dest="window_factor", type=float, default=S)
    p.add_argument("--quantile-level", dest="quantile_level", type=float, default=S)
    p.add_argument("--check-orderings", dest="check_orderings", action="store_true", default=S)
    p.add_argument("--unit-weights", dest="unit_weights", action="store_true", default=S,
                   help="deterministic unit weights (debugging)")
    p.add_argument("--workers", type=int, default=S)
    p.add_argument("--out", dest="output", default=S, help="output prefix for .csv and .json")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fppfluct", description="First-passage percolation fluctuation experiments.")
    parser.add_argument("--version", action="version", version=version_string())
    sub = parser.add_subparsers(dest="kind", required=True, parser_class=_Parser)
    helps = {
        "simulate": "passage-time samples and spreads for one geometry",
        "growth-check": "growth representation against Dijkstra cylinder times",
        "gauss-check": "certificates for the Gaussian-maximum toolkit",
        "confinement": "vertical span of tube geodesics",
        "min-cyl": "minimum over stacked cylinders against the tube time",
        "torus-moments": "central moments of the torus time",
        "exponent-fit": "log-log fit of spread against n",
        "calibrate-a": "calibrate a_hat from low quantiles of cylinder times",
    }
    parser.subcommands = {}
    for name, text in helps.items():
        sp = parser.subcommands[name] = sub.add_parser(name, help=text)
        _common(sp)
        if name == "exponent-fit":
            sp.add_argument("--input", default=argparse.SUPPRESS, help="CSV with n and spread columns")
            sp.add_argument("--n-boot", dest="n_boot", type=int, default=1000)
    return parser


def make_config(args: argparse.Namespace) -> ExperimentConfig:
    values = load_config(args.config) if args.config else {}
    skip = {"config", "n_boot"}
    values.update({k: v for k, v in vars(args).items() if k not in skip})
    return ExperimentConfig(**values).validate()


def _read_spread_csv(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if not reader.fieldnames or not {"n", "spread"} <= set(reader.fieldnames):
            raise InvalidParameter(f"{path} needs 'n' and 'spread' columns")
        return [(float(r["n"]), float(r["spread"])) for r in reader]


def run_exponent_fit(cfg: ExperimentConfig, n_boot: int) -> ExperimentReport:
    t0 = time.perf_counter()
    lo = hi = math.nan
    if cfg.input:
        pairs = _read_spread_csv(cfg.input)
    else:
        if not cfg.n:
            raise InvalidParameter("exponent-fit needs --input or --n")
        sim = simulate(cfg)
        pairs = [(r["n"], r["spread"]) for r in sim.rows]
        lo, hi, _ = bootstrap_slope_ci(sim.samples, cfg.c, n_boot, rng=replica_rng(cfg.seed, 1, 2, 3))
    fit = exponent_fit(pairs)
    rows = [{"n": int(n), "spread": s, "residual": r, "slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2,
             "slope_ci_lo": lo, "slope_ci_hi": hi} for n, s, r in zip(fit.n, fit.spread, fit.residuals)]
    cols = ["n", "spread", "residual", "slope", "intercept", "r2", "slope_ci_lo", "slope_ci_hi"]
    meta = {"config": cfg.echo(), "seed": cfg.seed, "version": version_string(), "wall_time_s": time.perf_counter() - t0}
    return ExperimentReport(cols, rows, meta)


def _gauss_report(cfg: ExperimentConfig) -> tuple[ExperimentReport, dict]:
    t0 = time.perf_counter()
    cert = gauss_check(cfg.seed)
    rows = [{"check": k, "value": v} for k, v in cert.items() if isinstance(v, float)]
    meta = {"config": cfg.echo(), "seed": cfg.seed, "version": version_string(),
            "wall_time_s": time.perf_counter() - t0, "certificates": cert}
    return ExperimentReport(["check", "value"], rows, meta), cert


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
        if args.kind in NEEDS_N and not cfg.n:
            parser.subcommands[args.kind].print_usage(sys.stderr)
            print(f"fppfluct {args.kind}: error: the following arguments are required: --n", file=sys.stderr)
            return 1
        if args.kind == "gauss-check":
            report, cert = _gauss_report(cfg)
            sys.stdout.write(json.dumps(cert, indent=2) + "\n")
        else:
            if args.kind == "exponent-fit":
                report = run_exponent_fit(cfg, args.n_boot)
            else:
                report = EXPERIMENTS[args.kind](cfg)
            sys.stdout.write(report.csv_text())
        if cfg.output:
            report.write(cfg.output)
    except (InvalidParameter, FileNotFoundError, json.JSONDecodeError, TypeError) as exc:
        print(f"fppfluct {args.kind}: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except WindowOverflow as exc:
        print(f"fppfluct {args.kind}: torus window overflow: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as an internal error
        print(f"fppfluct {args.kind}: internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
