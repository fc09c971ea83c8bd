"""
Closed-form data freshness model.

Average AoI and service latency of a device that refreshes its cached data
every ``theta`` slots, the impact functions of both, and the resulting
quality-of-data (QoD) score. Every function accepts an ``UpdateCycle``, a
plain float or a numpy array of cycle lengths, so the oracle can evaluate
whole frequency grids at once.
"""

from __future__ import annotations

import math

import numpy as np

from fresh_contracts.core.errors import DomainError
from fresh_contracts.core.market.models import FreshnessCaps, SlotConfig, UpdateCycle

CycleLike = UpdateCycle | float | np.ndarray


def _theta(cycle: CycleLike) -> float | np.ndarray:
    """Extract cycle lengths and reject anything shorter than one slot."""
    theta = cycle.theta if isinstance(cycle, UpdateCycle) else cycle
    theta_arr = np.asarray(theta, dtype=float)
    if np.any(~(theta_arr >= 1.0)):
        raise DomainError(f"Update cycle must span at least one slot, got {theta!r}")
    return theta_arr if theta_arr.ndim else float(theta_arr)


def average_aoi(cycle: CycleLike, slot: SlotConfig) -> float | np.ndarray:
    """Average age of information, in seconds, over a uniformly timed request."""
    theta = _theta(cycle)
    return slot.slot_duration * (1.0 / theta + theta / 2.0 + 0.5)


def average_latency(cycle: CycleLike, slot: SlotConfig) -> float | np.ndarray:
    """Average service latency: one slot, or two when the request hits the refresh."""
    theta = _theta(cycle)
    return slot.slot_duration * (1.0 + 1.0 / theta)


def aoi_impact(aoi: float | np.ndarray, caps: FreshnessCaps) -> float | np.ndarray:
    return caps.max_aoi - aoi


def latency_impact(
    latency: float | np.ndarray, caps: FreshnessCaps
) -> float | np.ndarray:
    return caps.max_latency - latency


def qod_log_argument(
    cycle: CycleLike, slot: SlotConfig, caps: FreshnessCaps, alpha: float
) -> float | np.ndarray:
    """The quantity under the QoD logarithm; must be positive for a valid score."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must lie in [0, 1], got {alpha!r}")
    g = aoi_impact(average_aoi(cycle, slot), caps)
    h = latency_impact(average_latency(cycle, slot), caps)
    return alpha * (g - h) + h + 1.0


def qod_score(
    cycle: CycleLike, slot: SlotConfig, caps: FreshnessCaps, alpha: float
) -> float | np.ndarray:
    """QoD of a device refreshing every ``cycle`` slots.

    Raises:
        DomainError: if the log argument is not positive, i.e. the update
            frequency is infeasible for the given caps.
    """
    argument = qod_log_argument(cycle, slot, caps, alpha)
    if np.any(~(np.asarray(argument) > 0.0)):
        raise DomainError(
            f"QoD log argument must be positive, got min "
            f"{float(np.min(argument))!r} for alpha={alpha}"
        )
    if isinstance(argument, np.ndarray):
        return np.log(argument)
    return math.log(argument)
