"""Command-line interface: one subcommand per run mode plus helpers.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
Errors go to stderr as single machine-parsable lines.
"""

from __future__ import annotations

import argparse
import sys

from . import __version__
from .config import MODES, default_config, load_config
from .errors import MagsimError, ParseError, ValidationError
from .runners import run_experiment

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="magsim",
        description="Ancilla-assisted DC magnetometry simulator")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    for mode in MODES:
        p = sub.add_parser(mode, help=f"run the {mode} experiment")
        _add_run_args(p)

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("--config", default=None)
    p_val.add_argument("--set", dest="overrides", action="append", default=[],
                       metavar="SECTION.KEY=VALUE")

    sub.add_parser("defaults", help="print the default configuration")
    return parser


def _add_run_args(p: argparse.ArgumentParser):
    p.add_argument("--config", default=None, help="INI config file")
    p.add_argument("--set", dest="overrides", action="append", default=[],
                   metavar="SECTION.KEY=VALUE",
                   help="override a config key (repeatable; wins over file)")
    p.add_argument("--out", default=None, help="output CSV path")


def _fail(exc: Exception, code: int) -> int:
    print(f"magsim: error: {type(exc).__name__}: {exc}", file=sys.stderr)
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "defaults":
        cfg = default_config()
        for key in sorted(cfg.raw):
            print(f"{key} = {cfg.raw[key]}")
        return EXIT_OK

    try:
        if args.command == "validate":
            load_config(args.config, args.overrides)
            print("ok")
            return EXIT_OK
        overrides = list(args.overrides) + [f"run.mode={args.command}"]
        cfg = load_config(args.config, overrides)
    except (ParseError, ValidationError) as exc:
        return _fail(exc, EXIT_CONFIG)

    out_path = args.out or cfg.run.get("out") or f"{args.command}.csv"
    try:
        table = run_experiment(cfg)
        table.write_csv(out_path)
    except MagsimError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except (ValueError, ArithmeticError) as exc:
        return _fail(exc, EXIT_NUMERICAL)
    except OSError as exc:
        return _fail(exc, EXIT_NUMERICAL)
    print(f"wrote {out_path} ({table.n_rows} rows)")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
