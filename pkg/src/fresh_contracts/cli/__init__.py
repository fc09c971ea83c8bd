"""fresh-contracts command line."""

from .app import main

__all__ = ["main"]
