"""Command-line entry point.

Subcommands mirror the experiments: fit, path, multistage,
oracle-verify, selection-verify, sparsity-verify, diagnostics. A
declarative JSON config may be given with --config; flags override it.
Exit codes: 0 success, 1 usage error, 2 ingestion error, 3 numerical
failure.
"""

import argparse
import json
import os
import sys

import numpy as np

from .bench import EXPERIMENTS, ExperimentConfig, emit_report, run_experiment
from .exceptions import DomainError, IngestionError, NumericalError

USAGE_EXIT = 1
INGESTION_EXIT = 2
NUMERICAL_EXIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def _add_common_flags(sub):
    sub.add_argument("--config", help="JSON config file; flags override its keys")
    sub.add_argument("--seed", type=int, help="64-bit RNG seed")
    sub.add_argument("--output", help="report path; figures land next to it")
    sub.add_argument("--format", choices=("json", "csv"), default=None)
    sub.add_argument("--standardize", action="store_true", default=None,
                     help="rescale columns to |x_j|_2^2 = n")
    sub.add_argument("--replicates", type=int)
    sub.add_argument("--family", choices=("linear", "logistic", "poisson"))
    sub.add_argument("--penalty", help="l1 | mcp:<gamma> | scad:<a>")
    sub.add_argument("--lambda", dest="lam",
                     help="penalty level, or 'auto' for calibrated")
    sub.add_argument("--xi", type=float)
    sub.add_argument("--eps0", type=float)
    sub.add_argument("--n", type=int)
    sub.add_argument("--p", type=int)
    sub.add_argument("--s0", dest="s0_size", type=int)
    sub.add_argument("--beta-min", dest="beta_min", type=float)
    sub.add_argument("--beta-max", dest="beta_max", type=float)
    sub.add_argument("--design",
                     help="identity | gaussian_iid | gaussian_correlated:<rho> "
                          "| from_file:<path>")
    sub.add_argument("--sigma", type=float)
    sub.add_argument("--stages", type=int)
    sub.add_argument("--workers", type=int)
    sub.add_argument("--header", action="store_true", default=None,
                     help="ingested CSV has a header row")
    sub.add_argument("--no-figures", dest="figures", action="store_false",
                     default=None)


def build_parser() -> _Parser:
    parser = _Parser(prog="wlasso",
                     description="weighted l1-penalized GLM estimation and diagnostics")
    subs = parser.add_subparsers(dest="experiment", required=True)
    for name in EXPERIMENTS:
        sub = subs.add_parser(name.replace("_", "-"))
        _add_common_flags(sub)
    return parser


def _config_from_args(args) -> tuple[ExperimentConfig, str | None]:
    settings = {}
    if args.config:
        if not os.path.exists(args.config):
            raise IngestionError(f"no such config file: {args.config}")
        with open(args.config, "r", encoding="utf-8") as fh:
            try:
                settings.update(json.load(fh))
            except json.JSONDecodeError as exc:
                raise IngestionError(f"bad config file {args.config}: {exc}") from exc
    settings["experiment"] = args.experiment.replace("-", "_")
    for key in (
        "seed", "output", "standardize", "replicates", "family", "penalty",
        "xi", "eps0", "n", "p", "s0_size", "beta_min", "beta_max", "design",
        "sigma", "stages", "workers", "figures", "header",
    ):
        value = getattr(args, key, None)
        if value is not None:
            settings[key] = value
    if args.lam is not None:
        settings["lam"] = "auto" if args.lam == "auto" else float(args.lam)
    if settings["experiment"].endswith("_verify") and "seed" not in settings:
        raise DomainError("--seed is required for verification experiments")
    fmt = args.format or settings.pop("format", None)
    settings.pop("format", None)
    return ExperimentConfig.from_dict(settings), fmt


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config, fmt = _config_from_args(args)
        result = run_experiment(config)
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return INGESTION_EXIT
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_EXIT

    summary_keys = sorted(result.aggregates)
    print(f"experiment: {result.experiment}")
    for k in summary_keys:
        print(f"  {k}: {result.aggregates[k]}")

    if config.output:
        fmt = fmt or ("csv" if config.output.endswith(".csv") else "json")
        try:
            emit_report(result, format=fmt, path=config.output)
        except OSError as exc:
            print(f"ingestion error: cannot write {config.output}: {exc}",
                  file=sys.stderr)
            return INGESTION_EXIT
        print(f"report written to {config.output}")
        if config.figures:
            from .figures import render_figures

            out_dir = os.path.dirname(os.path.abspath(config.output))
            stem = os.path.splitext(os.path.basename(config.output))[0]
            for figure_path in render_figures(result, out_dir, stem):
                print(f"figure written to {figure_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
