"""Command-line entry point for fresh-contracts experiments."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from fresh_contracts import __version__
from fresh_contracts.cli.commands import COMMANDS
from fresh_contracts.cli.utils.error_handling import run_guarded

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def common_options() -> argparse.ArgumentParser:
    """Flags shared by every verb."""
    parser = argparse.ArgumentParser(add_help=False)
    parser.add_argument("--config", type=Path, default=None, help="YAML config file")
    parser.add_argument("--seed", type=int, default=None, help="run a single seed")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--checkpoint", type=Path, default=None, help="policy file")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="logging verbosity on standard error",
    )
    return parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fresh-contracts",
        description="Design data-sharing contracts for fresh mobile sensing data",
    )
    parser.add_argument("--version", action="version", version=__version__)
    subparsers = parser.add_subparsers(dest="command", required=True)
    parents = [common_options()]
    for command in COMMANDS:
        command.register(subparsers, parents)
    return parser


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    return run_guarded(args.handler, args)


if __name__ == "__main__":
    sys.exit(main())
