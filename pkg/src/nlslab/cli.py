"""Command-line front end.

    nlslab <command> --config <path> [--set section.key=value ...] --out <dir>

Commands: evolve, sweep, growth, bilinear, scaling, localnorm.
Exit codes: 0 success, 2 configuration error, 3 runtime error.
NLSLAB_OUT_ROOT provides the default output root (<root>/<command>).
"""

from __future__ import annotations

import argparse
import os
import sys

from .config import COMMANDS, ConfigError, ENV_OUT_ROOT, parse_config
from .runner import run

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlslab",
        description="Pseudo-spectral cubic defocusing Schrodinger simulator "
        "and smoothing-multiplier laboratory on periodic tori",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="INI config file")
        p.add_argument(
            "--set",
            dest="overrides",
            action="append",
            default=[],
            metavar="SECTION.KEY=VALUE",
            help="override a config value (repeatable; highest precedence)",
        )
        p.add_argument("--out", help="output directory (overrides [output] dir)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = args.out
    if out is None and os.environ.get(ENV_OUT_ROOT):
        out = os.path.join(os.environ[ENV_OUT_ROOT], args.command)
    try:
        cfg = parse_config(
            config_path=args.config,
            overrides=args.overrides,
            command=args.command,
            output_dir=out,
        )
    except ConfigError as exc:
        print(f"nlslab: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"nlslab: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
