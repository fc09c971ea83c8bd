"""Command-line utilities for fresh-contracts."""

from .error_handling import (
    EXIT_FAILURE,
    EXIT_OK,
    EXIT_USAGE,
    display_error,
    display_usage_error,
    run_guarded,
)

__all__ = [
    "EXIT_FAILURE",
    "EXIT_OK",
    "EXIT_USAGE",
    "display_error",
    "display_usage_error",
    "run_guarded",
]
