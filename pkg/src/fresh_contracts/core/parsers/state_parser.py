"""
Parsing of network state vectors laid out as M, K, A_max, D_max, Q..., phi...
"""

from __future__ import annotations

import logging
from collections.abc import Iterable
from dataclasses import dataclass

from pydantic import ValidationError

from fresh_contracts.core.learning.env import NetworkState

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ParsedRow:
    """Outcome of parsing one input line: a state, or the reason it was rejected."""

    line_number: int
    text: str
    state: NetworkState | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.state is not None


class StateParser:
    """Turns comma- or whitespace-separated state rows into ``NetworkState``s."""

    def parse_row(self, text: str) -> NetworkState:
        """Parse a single state vector, with or without surrounding brackets."""
        cleaned = text.strip().strip("[]").replace(",", " ")
        if not cleaned.strip():
            raise ValueError("Empty state row")
        try:
            values = [float(token) for token in cleaned.split()]
        except ValueError as e:
            raise ValueError(f"Non-numeric value in state row {text!r}") from e
        try:
            return NetworkState.from_row(values)
        except ValidationError as e:
            messages = "; ".join(err["msg"] for err in e.errors())
            raise ValueError(f"Invalid state row {text!r}: {messages}") from e

    def parse_lines(self, lines: Iterable[str]) -> list[ParsedRow]:
        """Parse every non-blank, non-comment line, keeping failures per row."""
        rows = []
        for line_number, line in enumerate(lines, start=1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                rows.append(ParsedRow(line_number, text, state=self.parse_row(text)))
            except ValueError as e:
                logger.warning(f"Skipping state row {line_number}: {e}")
                rows.append(ParsedRow(line_number, text, error=str(e)))
        return rows
