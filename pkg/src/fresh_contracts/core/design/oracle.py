"""
Exhaustive grid solver for the constrained contract design problem.

Every contract on a Cartesian grid of (update frequency, reward) items is
checked against IR and IC and the feasible one with the highest base-station
utility wins. Ties go to the first contract in lexicographic grid order: an
item's index is f-major (f index * |r_grid| + r index) and a contract orders
its item indices type 1 first.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from fresh_contracts.core.errors import GridTooLargeError, NoFeasiblePointError
from fresh_contracts.core.market.contract import CONSTRAINT_TOLERANCE
from fresh_contracts.core.market.models import Contract, MarketConfig
from fresh_contracts.core.market.qod import qod_log_argument

MAX_EVALUATIONS = 10**8
DEFAULT_GRID_POINTS = 64
DEFAULT_R_MAX = 2.0
DEFAULT_F_MIN = 0.01
DEFAULT_REFINE_ROUNDS = 2
DEFAULT_SHRINK = 0.25

# Number of contract evaluations held in memory per block.
_BLOCK_ELEMENTS = 1 << 20

logger = logging.getLogger(__name__)


class GridSpec(BaseModel):
    """Candidate update frequencies and rewards for one contract item."""

    model_config = ConfigDict(frozen=True)

    f_grid: tuple[float, ...]
    r_grid: tuple[float, ...]

    @field_validator("f_grid", "r_grid")
    @classmethod
    def _strictly_increasing(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if not value:
            raise ValueError("Grid must contain at least one point")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("Grid points must be strictly increasing")
        return value

    @field_validator("f_grid")
    @classmethod
    def _valid_frequencies(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if value[0] <= 0 or value[-1] > 1:
            raise ValueError("Update frequencies must lie in (0, 1]")
        return value

    @field_validator("r_grid")
    @classmethod
    def _valid_rewards(cls, value: tuple[float, ...]) -> tuple[float, ...]:
        if value[0] < 0 or value[-1] <= 0:
            raise ValueError("Rewards must lie in [0, r_max] with r_max > 0")
        return value

    @property
    def size(self) -> int:
        return len(self.f_grid) * len(self.r_grid)

    @property
    def r_spacing(self) -> float:
        """Largest gap between neighbouring reward candidates."""
        if len(self.r_grid) < 2:
            return 0.0
        return float(np.max(np.diff(self.r_grid)))


def default_grid(
    r_max: float = DEFAULT_R_MAX,
    points: int = DEFAULT_GRID_POINTS,
    f_min: float = DEFAULT_F_MIN,
) -> GridSpec:
    """Evenly spaced grids over [f_min, 1] x [0, r_max]."""
    return GridSpec(
        f_grid=tuple(np.linspace(f_min, 1.0, points).tolist()),
        r_grid=tuple(np.linspace(0.0, r_max, points).tolist()),
    )


class OracleResult(BaseModel):
    """Best contract found on a grid, with bookkeeping counts."""

    model_config = ConfigDict(frozen=True)

    best_contract: Contract
    best_utility: float
    feasible_count: int = Field(ge=0)
    evaluated_count: int = Field(ge=0)
    grids: tuple[GridSpec, ...]


@dataclass(frozen=True)
class _Candidates:
    """Flattened item candidates of one type, in f-major order."""

    frequencies: np.ndarray
    rewards: np.ndarray

    @classmethod
    def from_grid(cls, grid: GridSpec) -> _Candidates:
        f, r = np.meshgrid(
            np.asarray(grid.f_grid), np.asarray(grid.r_grid), indexing="ij"
        )
        return cls(frequencies=f.ravel(), rewards=r.ravel())

    @property
    def size(self) -> int:
        return self.frequencies.size


def solve_grid(
    market: MarketConfig,
    grid: GridSpec,
    max_evaluations: int = MAX_EVALUATIONS,
) -> OracleResult:
    """Find the utility-maximizing feasible contract on ``grid``.

    Raises:
        GridTooLargeError: if |f_grid|^K * |r_grid|^K exceeds ``max_evaluations``.
        NoFeasiblePointError: if no grid contract satisfies IR and IC.
    """
    grids = tuple(grid for _ in market.types)
    return _solve(market, grids, max_evaluations)


def refine(
    market: MarketConfig,
    seed_result: OracleResult,
    shrink: float = DEFAULT_SHRINK,
    rounds: int = DEFAULT_REFINE_ROUNDS,
    max_evaluations: int = MAX_EVALUATIONS,
) -> OracleResult:
    """Re-solve on grids narrowed around the incumbent, round after round.

    Each round narrows every type's window to ``shrink`` times its previous
    width, centred on that type's incumbent item and kept inside the previous
    window. The incumbent itself is always a candidate, so utility never
    decreases across rounds.
    """
    if rounds < 1:
        raise ValueError(f"rounds must be at least 1, got {rounds}")
    if not 0.0 < shrink <= 1.0:
        raise ValueError(f"shrink must lie in (0, 1], got {shrink}")

    incumbent = seed_result
    grids = seed_result.grids
    f_points = [len(grid.f_grid) for grid in grids]
    r_points = [len(grid.r_grid) for grid in grids]

    for round_index in range(1, rounds + 1):
        grids = tuple(
            GridSpec(
                f_grid=_narrow(grid.f_grid, item.update_frequency, shrink, n_f),
                r_grid=_narrow(grid.r_grid, item.reward, shrink, n_r),
            )
            for grid, item, n_f, n_r in zip(
                grids, incumbent.best_contract.items, f_points, r_points
            )
        )
        result = _solve(market, grids, max_evaluations)
        if result.best_utility >= incumbent.best_utility:
            incumbent = result
        else:
            incumbent = incumbent.model_copy(update={"grids": grids})
        logger.debug(
            f"Refinement round {round_index}/{rounds}: "
            f"utility={incumbent.best_utility:.6f}"
        )

    return incumbent


def solve_refined(
    market: MarketConfig,
    grid: GridSpec,
    shrink: float = DEFAULT_SHRINK,
    rounds: int = DEFAULT_REFINE_ROUNDS,
    max_evaluations: int = MAX_EVALUATIONS,
) -> OracleResult:
    """Grid solve followed by ``rounds`` of local refinement (none if 0)."""
    result = solve_grid(market, grid, max_evaluations)
    if rounds > 0:
        result = refine(market, result, shrink, rounds, max_evaluations)
    return result


def _narrow(
    values: tuple[float, ...], center: float, shrink: float, points: int
) -> tuple[float, ...]:
    lo, hi = values[0], values[-1]
    width = shrink * (hi - lo)
    if width >= hi - lo:
        start, stop = lo, hi
    else:
        start = min(max(center - width / 2.0, lo), hi - width)
        stop = min(start + width, hi)
    window = np.linspace(start, stop, points) if points > 1 else np.array([center])
    return tuple(np.union1d(window, [center]).tolist())


def _solve(
    market: MarketConfig,
    grids: tuple[GridSpec, ...],
    max_evaluations: int,
) -> OracleResult:
    candidates = [_Candidates.from_grid(grid) for grid in grids]
    sizes = [c.size for c in candidates]
    evaluated = math.prod(sizes)
    if evaluated > max_evaluations:
        raise GridTooLargeError(
            f"Grid holds {evaluated} contracts, above the limit of {max_evaluations}"
        )

    phi = market.phi
    n_types = len(phi)
    # utilities[k][j][i]: type-k utility from candidate i of type j's grid
    utilities = [
        [c.rewards - c.frequencies / phi[k] for c in candidates]
        for k in range(n_types)
    ]
    margins = []
    for k, c in enumerate(candidates):
        argument = qod_log_argument(
            1.0 / c.frequencies, market.slot, market.caps, market.alpha
        )
        valid = argument > 0.0
        qod = np.log(np.where(valid, argument, 1.0))
        margin = market.probabilities[k] * (market.unit_profit * qod - c.rewards)
        usable = valid & (utilities[k][k] >= -CONSTRAINT_TOLERANCE)
        margins.append(np.where(usable, margin, -np.inf))

    prefixes = np.flatnonzero(np.isfinite(margins[0]))[:, None]
    for j in range(1, n_types - 1):
        prefixes = _extend_prefixes(prefixes, j, utilities, margins)

    best_value = -np.inf
    best_index: tuple[int, ...] | None = None
    feasible = 0
    last = n_types - 1

    if n_types == 1:
        values = market.device_count * margins[0]
        mask = np.isfinite(values)
        feasible = int(mask.sum())
        if feasible:
            i = int(np.argmax(values))
            best_value, best_index = float(values[i]), (i,)
    else:
        block = max(1, _BLOCK_ELEMENTS // sizes[last])
        last_margin = margins[last]
        last_own = utilities[last][last]
        for start in range(0, len(prefixes), block):
            chunk = prefixes[start : start + block]
            mask = np.broadcast_to(np.isfinite(last_margin), (len(chunk), sizes[last]))
            base = np.zeros(len(chunk))
            for j in range(last):
                picked = chunk[:, j]
                base += margins[j][picked]
                # the last type must not envy type j's item, and vice versa
                mask = mask & (
                    last_own[None, :]
                    >= utilities[last][j][picked][:, None] - CONSTRAINT_TOLERANCE
                )
                mask = mask & (
                    utilities[j][j][picked][:, None]
                    >= utilities[j][last][None, :] - CONSTRAINT_TOLERANCE
                )
            count = int(mask.sum())
            if not count:
                continue
            feasible += count
            totals = market.device_count * (base[:, None] + last_margin[None, :])
            values = np.where(mask, totals, -np.inf)
            flat = int(np.argmax(values))
            row, col = divmod(flat, sizes[last])
            if values[row, col] > best_value:
                best_value = float(values[row, col])
                best_index = (*(int(i) for i in chunk[row]), col)

    if best_index is None:
        raise NoFeasiblePointError(
            f"None of the {evaluated} grid contracts satisfies IR and IC"
        )

    contract = Contract.from_arrays(
        [c.frequencies[i] for c, i in zip(candidates, best_index)],
        [c.rewards[i] for c, i in zip(candidates, best_index)],
    )
    logger.debug(
        f"Grid solve: {feasible}/{evaluated} feasible, best utility {best_value:.6f}"
    )
    return OracleResult(
        best_contract=contract,
        best_utility=best_value,
        feasible_count=feasible,
        evaluated_count=evaluated,
        grids=grids,
    )


def _extend_prefixes(
    prefixes: np.ndarray,
    j: int,
    utilities: list[list[np.ndarray]],
    margins: list[np.ndarray],
) -> np.ndarray:
    """Append type j's items to leading tuples, keeping IC among the leading types."""
    mask = np.broadcast_to(np.isfinite(margins[j]), (len(prefixes), margins[j].size))
    own_j = utilities[j][j]
    for k in range(j):
        picked = prefixes[:, k]
        mask = mask & (
            own_j[None, :] >= utilities[j][k][picked][:, None] - CONSTRAINT_TOLERANCE
        )
        mask = mask & (
            utilities[k][k][picked][:, None]
            >= utilities[k][j][None, :] - CONSTRAINT_TOLERANCE
        )
    rows, cols = np.nonzero(mask)
    return np.column_stack([prefixes[rows], cols])
