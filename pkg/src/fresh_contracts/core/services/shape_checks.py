"""Qualitative shape checks on experiment curves."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def value_range(values: Sequence[float]) -> float:
    """Spread between the largest and smallest value."""
    if not len(values):
        raise ValueError("Cannot take the range of an empty sequence")
    return float(np.max(values) - np.min(values))


def is_unimodal(values: Sequence[float], tolerance: float = 0.0) -> bool:
    """Whether the curve rises to an interior maximum and then declines.

    Steps against the trend of at most ``tolerance`` are ignored.
    """
    y = np.asarray(values, dtype=float)
    if y.size < 3:
        return False
    peak = int(np.argmax(y))
    if peak in (0, y.size - 1):
        return False
    rising = np.diff(y[: peak + 1])
    falling = np.diff(y[peak:])
    return bool(np.all(rising >= -tolerance) and np.all(falling <= tolerance))


def relative_range(values: Sequence[float]) -> float:
    """Range divided by the magnitude of the mean, a unit-free spread."""
    mean = float(np.mean(values)) if len(values) else 0.0
    if mean == 0.0:
        raise ValueError("Relative range needs a non-empty curve with non-zero mean")
    return value_range(values) / abs(mean)
