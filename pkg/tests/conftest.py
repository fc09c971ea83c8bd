"""Shared fixtures for the fresh-contracts test suite."""

from __future__ import annotations

import pytest

from fresh_contracts.config import AppConfig, ExperimentConfig
from fresh_contracts.core.learning.env import EnvConfig, NetworkState, market_from_state
from fresh_contracts.core.learning.network import MlpSpec
from fresh_contracts.core.market.models import MarketConfig


@pytest.fixture
def reference_states() -> list[NetworkState]:
    return [
        NetworkState.from_row(row.split(","))
        for row in AppConfig.REFERENCE_STATES
    ]


@pytest.fixture
def state_one(reference_states: list[NetworkState]) -> NetworkState:
    """M=40, K=2, caps (0.95, 0.73), Q=(0.84, 0.16), phi=(2, 12)."""
    return reference_states[0]


@pytest.fixture
def env_config() -> EnvConfig:
    return EnvConfig()


@pytest.fixture
def market_one(state_one: NetworkState, env_config: EnvConfig) -> MarketConfig:
    return market_from_state(state_one, env_config)


@pytest.fixture
def small_specs(env_config: EnvConfig) -> tuple[MlpSpec, MlpSpec]:
    """Actor and critic small enough for finite-difference checks."""
    actor = MlpSpec(
        input_dim=env_config.feature_dim,
        hidden_layers=(5, 4),
        output_dim=env_config.action_dim,
        init_seed=11,
        output_gain=0.5,
    )
    critic = MlpSpec(
        input_dim=env_config.feature_dim,
        hidden_layers=(5, 4),
        output_dim=1,
        init_seed=12,
    )
    return actor, critic


@pytest.fixture
def tiny_config() -> ExperimentConfig:
    """A configuration whose train/compare/sweep runs finish in seconds."""
    return ExperimentConfig.model_validate(
        {
            "env": {"horizon": 16},
            "ppo": {"minibatch_size": 8, "update_epochs": 2, "episodes": 2},
            "nn": {"actor_hidden": [8], "critic_hidden": [8]},
            "oracle": {"points": 12, "refine_rounds": 1},
            "evaluation": {"n_states": 4, "seed": 5},
            "sweep": {"alphas": [0.25, 0.5, 0.75], "n_states": 2},
            "seeds": [312],
        }
    )
