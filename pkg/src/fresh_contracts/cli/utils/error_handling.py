"""Error handling utilities for the command line."""

from __future__ import annotations

import argparse
import logging
import sys
from collections.abc import Callable

from pydantic import ValidationError

from fresh_contracts.core.errors import (
    CheckpointError,
    ConfigError,
    FreshContractsError,
    GridTooLargeError,
)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

logger = logging.getLogger(__name__)

CommandHandler = Callable[[argparse.Namespace], int]


def display_error(error_msg: str) -> None:
    """Print a one-line diagnostic on standard error.

    Args:
        error_msg: The error message to display
    """
    print(f"error: {error_msg}", file=sys.stderr)


def display_usage_error(error_msg: str) -> None:
    """Display configuration, checkpoint and argument problems."""
    display_error(error_msg)
    print("hint: check --config, --checkpoint and the command flags", file=sys.stderr)


def display_grid_too_large(error_msg: str) -> None:
    display_error(f"GridTooLarge: {error_msg}")
    print(
        "hint: lower oracle.points or raise oracle.max_evaluations",
        file=sys.stderr,
    )


def run_guarded(handler: CommandHandler, args: argparse.Namespace) -> int:
    """Run a command handler, mapping failures to exit codes.

    0 on success, 1 for runtime failures (oracle errors, divergence),
    2 for configuration, checkpoint and argument errors.
    """
    try:
        return handler(args)
    except (ConfigError, CheckpointError) as e:
        logger.error(f"Command failed: {e}")
        display_usage_error(str(e))
        return EXIT_USAGE
    except GridTooLargeError as e:
        logger.error(f"Command failed: {e}")
        display_grid_too_large(str(e))
        return EXIT_FAILURE
    except FreshContractsError as e:
        logger.error(f"Command failed: {e}")
        display_error(str(e))
        return EXIT_FAILURE
    except (ValidationError, ValueError) as e:
        logger.error(f"Invalid input: {e}")
        display_usage_error(str(e))
        return EXIT_USAGE
