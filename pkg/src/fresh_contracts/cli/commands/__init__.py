"""Command-line verbs, one module each."""

from . import alpha_sweep, compare, oracle, states, train

COMMANDS = [train, compare, states, alpha_sweep, oracle]

__all__ = ["COMMANDS"]
