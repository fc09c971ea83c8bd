"""Parsers for user-supplied network state vectors."""

from .state_parser import ParsedRow, StateParser

__all__ = ["ParsedRow", "StateParser"]
