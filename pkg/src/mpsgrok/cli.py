"""Command-line entry point: ``mpsgrok train | analyze | plot | compare``."""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, ExperimentConfig
from .datasets import DataError, FormatError
from .experiment import (NumericalError, RunError, SchemaError, WORKERS_ENV, analyze, compare,
                         load_and_override, plot_run, train)
from .info import InsufficientDataError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_NUMERIC = 4
EXIT_RUN = 5


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="mpsgrok",
        description="MPS classifier training with entanglement and information-flow diagnostics.",
        epilog=f"Set {WORKERS_ENV}=<n> to run transfer-entropy estimates on n processes.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log every sweep")
    sub = p.add_subparsers(dest="command", required=True)

    t = sub.add_parser("train", help="train a classifier and record per-sweep traces")
    t.add_argument("--config", required=True, help="experiment config file")
    t.add_argument("--out", required=True, help="run directory")
    t.add_argument("--seed", type=int, help="model initialization seed")
    t.add_argument("--sweeps", type=int, help="number of sweeps")
    t.add_argument("--chi", type=int, help="maximum bond dimension")
    t.add_argument("--tau-max", type=int, help="largest TE delay recorded in the snapshot")
    t.add_argument("--k", type=int, help="nearest neighbours for the estimators")
    t.add_argument("--resume", action="store_true", help="continue after the last completed sweep")

    a = sub.add_parser("analyze", help="transfer entropy and O-information of a run")
    a.add_argument("run", help="run directory")
    a.add_argument("--tau-max", type=int, help="largest delay (default from the run config)")
    a.add_argument("--k", type=int, help="nearest neighbours (default from the run config)")

    pl = sub.add_parser("plot", help="render SVG figures next to the run tables")
    pl.add_argument("run", help="analyzed run directory")

    c = sub.add_parser("compare", help="z-scores between the TE curves of two runs")
    c.add_argument("run_a")
    c.add_argument("run_b")
    c.add_argument("--out", required=True, help="directory for zscores.csv")
    return p


def _train(args) -> None:
    cfg: ExperimentConfig = load_and_override(
        args.config, seed=args.seed, n_sweeps=args.sweeps, chi_max=args.chi,
        tau_max=args.tau_max, k=args.k)
    run = train(cfg, args.out, resume=args.resume)
    print(run)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "train":
            _train(args)
        elif args.command == "analyze":
            print(analyze(args.run, args.tau_max, args.k))
        elif args.command == "plot":
            for path in plot_run(args.run):
                print(path)
        else:
            print(compare(args.run_a, args.run_b, args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, DataError, SchemaError, InsufficientDataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (RunError, OSError) as exc:
        print(f"run error: {exc}", file=sys.stderr)
        return EXIT_RUN
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
