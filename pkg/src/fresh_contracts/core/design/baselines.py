"""
Non-learning contract designers used as reference points for the policy.
"""

from __future__ import annotations

import logging
from enum import Enum

import numpy as np

from fresh_contracts.core.design.oracle import (
    DEFAULT_SHRINK,
    MAX_EVALUATIONS,
    GridSpec,
    OracleResult,
    solve_refined,
)
from fresh_contracts.core.design.strategy import ContractDesigner
from fresh_contracts.core.learning.env import EnvConfig, NetworkState, market_from_state
from fresh_contracts.core.market.models import Contract, MarketConfig

logger = logging.getLogger(__name__)


class BaselineKind(str, Enum):
    RANDOM = "uniform-random"
    ORACLE_REPLAY = "oracle-replay"


def random_contract(
    state: NetworkState, config: EnvConfig, rng: np.random.Generator
) -> Contract:
    """Uniform contract in the decoded action box; ``state`` is ignored."""
    k = config.type_count
    # uniform on (f_min, 1]: reflect the half-open [0, 1) draw
    frequencies = 1.0 - rng.random(k) * (1.0 - config.f_min)
    rewards = rng.uniform(0.0, config.r_max, k)
    return Contract.from_arrays(frequencies, rewards)


def oracle_replay(
    state: NetworkState,
    market: MarketConfig,
    grid: GridSpec,
    refine_rounds: int = 0,
    max_evaluations: int = MAX_EVALUATIONS,
    shrink: float = DEFAULT_SHRINK,
) -> OracleResult:
    """Grid oracle solved for this exact state."""
    result = solve_refined(
        market,
        grid,
        shrink=shrink,
        rounds=refine_rounds,
        max_evaluations=max_evaluations,
    )
    logger.debug(
        f"Oracle replay for state {state.as_row()}: utility {result.best_utility:.4f}"
    )
    return result


class RandomContractDesigner(ContractDesigner):
    """Draws every contract from its own RNG stream, regardless of the state."""

    name = BaselineKind.RANDOM.value

    def __init__(self, config: EnvConfig, rng: np.random.Generator) -> None:
        self.config = config
        self.rng = rng

    def design(self, state: NetworkState) -> Contract:
        return random_contract(state, self.config, self.rng)


class OracleReplayDesigner(ContractDesigner):
    """Solves the grid oracle per state; an upper bound for the other designers."""

    name = BaselineKind.ORACLE_REPLAY.value

    def __init__(
        self,
        config: EnvConfig,
        grid: GridSpec,
        refine_rounds: int = 0,
        max_evaluations: int = MAX_EVALUATIONS,
        shrink: float = DEFAULT_SHRINK,
    ) -> None:
        self.config = config
        self.grid = grid
        self.refine_rounds = refine_rounds
        self.max_evaluations = max_evaluations
        self.shrink = shrink

    def solve(self, state: NetworkState) -> OracleResult:
        return oracle_replay(
            state,
            market_from_state(state, self.config),
            self.grid,
            self.refine_rounds,
            self.max_evaluations,
            self.shrink,
        )

    def design(self, state: NetworkState) -> Contract:
        return self.solve(state).best_contract
