"""Command-line front end.

Subcommands:
  run     resolve a config (file path or preset name), run the experiment,
          write data tables, metadata and SVG plots
  theory  print the closed-form predictions and derived run quantities
  resume  continue an interrupted run from its checkpoint
  sweep   run the configured parameter sweep and the scaling fit

Exit codes: 0 success, 2 validation error, 3 numerical failure, 4 fit
failure (data still written).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .analysis import AnalysisError
from .config import ConfigError, load_toml, resolve, to_toml
from .dynamics import GroundStateError, IntegrationBlowupError
from .ensemble import EnsembleError
from .checkpoint import CheckpointError
from .params import ParameterError
from .presets import get_preset, preset_names

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_FIT = 4


def _build_parser():
    ap = argparse.ArgumentParser(
        prog="atomlaser",
        description="Atom-laser linewidth simulator (mean-field and "
                    "truncated-Wigner modes)")
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True,
                        help="TOML config path or preset name "
                             f"({', '.join(preset_names())})")
    common.add_argument("--desk", action="store_true",
                        help="use the reduced desk variant of a preset")
    common.add_argument("--out", default=None, help="output directory")
    common.add_argument("--workers", type=int, default=None,
                        help="worker processes (default: "
                             "$ATOMLASER_WORKERS or 1)")
    common.add_argument("--seed", type=int, default=None,
                        help="override the master seed")
    common.add_argument("--dry-run", action="store_true",
                        help="validate, print derived quantities, exit")
    plot = common.add_mutually_exclusive_group()
    plot.add_argument("--plot", dest="plot", action="store_true",
                      default=None)
    plot.add_argument("--no-plot", dest="plot", action="store_false")

    sub.add_parser("run", parents=[common], help="run one experiment")
    sub.add_parser("theory", parents=[common],
                   help="print closed-form predictions")
    sub.add_parser("sweep", parents=[common], help="run a parameter sweep")
    rp = sub.add_parser("resume", parents=[common],
                        help="resume from a checkpoint")
    rp.add_argument("--checkpoint", default=None,
                    help="checkpoint path (default: <out>/checkpoint.alck)")
    return ap


def _load_raw(args) -> dict:
    name = args.config
    if os.path.exists(name):
        raw = load_toml(name)
    else:
        try:
            raw = get_preset(name, desk=args.desk)
        except KeyError as err:
            raise ConfigError(str(err)) from None
    if args.seed is not None:
        raw.setdefault("ensemble", {})["master_seed"] = int(args.seed)
    if args.out is not None:
        raw.setdefault("output", {})["directory"] = args.out
    if args.plot is not None:
        raw.setdefault("output", {})["plots"] = bool(args.plot)
    return raw


def _workers(args) -> int:
    if args.workers is not None:
        return max(1, args.workers)
    env = os.environ.get("ATOMLASER_WORKERS")
    return max(1, int(env)) if env else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        raw = _load_raw(args)
        if args.command == "sweep":
            resolved = resolve(raw)       # validates the sweep section too
            if not resolved.sweep_variable:
                raise ConfigError("sweep requires a [sweep] section")
        else:
            raw.pop("sweep", None)
            resolved = resolve(raw)
    except (ConfigError, ParameterError, OSError,
            json.JSONDecodeError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION

    if args.command == "theory" or args.dry_run:
        from .runner import theory_report
        for line in theory_report(resolved):
            print(line)
        if args.command != "theory" and args.dry_run:
            print("dry run: no computation performed")
        return EXIT_OK

    from .runner import run_experiment, run_sweep
    workers = _workers(args)
    out_dir = args.out or resolved.output_directory
    try:
        if args.command == "run":
            result = run_experiment(resolved, out_dir, workers=workers,
                                    plots=args.plot)
        elif args.command == "resume":
            ckpt = args.checkpoint or os.path.join(out_dir, "checkpoint.alck")
            if not os.path.exists(ckpt):
                print(f"error: checkpoint {ckpt} not found", file=sys.stderr)
                return EXIT_VALIDATION
            result = run_experiment(resolved, out_dir, workers=workers,
                                    plots=args.plot, resume_from=ckpt)
        elif args.command == "sweep":
            sweep = run_sweep(raw, out_dir, workers=workers, plots=args.plot)
            if sweep.fit is not None:
                print(f"scaling exponent = {sweep.fit.exponent:.4f} "
                      f"(95% CI [{sweep.fit.ci_low:.4f}, "
                      f"{sweep.fit.ci_high:.4f}])")
            print(f"wrote {os.path.join(out_dir, 'sweep.csv')}")
            return EXIT_OK
        else:                                     # pragma: no cover
            raise AssertionError(args.command)
    except CheckpointError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_VALIDATION
    except (IntegrationBlowupError, GroundStateError, EnsembleError) as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return EXIT_NUMERICAL
    except AnalysisError as err:
        print(f"fit failure: {err}", file=sys.stderr)
        return EXIT_FIT

    print(f"run complete in {result.wall_time:.1f} s; "
          f"artifacts in {out_dir}")
    if result.plateau is not None:
        de2 = 2 * result.records[0].theory_limit / 2
        print(f"plateau linewidth = {result.plateau:.4e} J "
              f"({result.plateau / result.records[0].theory_limit:.2f} x "
              f"theory bar 2dE)")
    if result.arc is not None:
        print(f"arc radius = {result.arc.radius:.4e} 1/m "
              f"(predicted {result.arc.predicted_radius:.4e})")
    if result.fit_trouble:
        print("warning: fit failures recorded; see linewidth table",
              file=sys.stderr)
        return EXIT_FIT
    return EXIT_OK


if __name__ == "__main__":                       # pragma: no cover
    sys.exit(main())
