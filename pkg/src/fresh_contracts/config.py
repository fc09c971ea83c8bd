"""Configuration for fresh-contracts experiments."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Literal

import numpy as np
import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from fresh_contracts.core.design.oracle import (
    DEFAULT_GRID_POINTS,
    DEFAULT_REFINE_ROUNDS,
    DEFAULT_SHRINK,
    MAX_EVALUATIONS,
    GridSpec,
    default_grid,
)
from fresh_contracts.core.errors import ConfigError
from fresh_contracts.core.learning.env import EnvConfig
from fresh_contracts.core.learning.network import MlpSpec
from fresh_contracts.core.learning.ppo import PpoConfig

logger = logging.getLogger(__name__)


# Load environment variables
load_dotenv()


class AppConfig:
    """Application configuration constants and settings."""

    # Output
    DEFAULT_OUTPUT_DIR = "results"
    OUTPUT_DIR_ENV_VAR = "FRESH_CONTRACTS_OUTPUT_DIR"

    # Artifacts
    TRAINING_LOG_TEMPLATE = "training_log_seed{seed}.csv"
    TEST_REWARDS_TEMPLATE = "test_rewards_seed{seed}.csv"
    CHECKPOINT_TEMPLATE = "policy_seed{seed}.fqck"
    COMPARISON_FILE = "comparison.csv"
    STATES_FILE = "states.csv"
    ALPHA_SWEEP_FILE = "alpha_sweep.csv"
    EFFECTIVE_CONFIG_FILE = "config.yaml"

    # CSV headers
    TRAINING_LOG_COLUMNS = [
        "episode",
        "mean_reward",
        "feasibility_rate",
        "surrogate_loss",
        "value_loss",
        "policy_std_mean",
    ]
    TEST_REWARDS_COLUMNS = [
        "episode",
        "ppo_reward",
        "random_reward",
        "ppo_feasibility_rate",
    ]
    COMPARISON_COLUMNS = [
        "state_id",
        "ppo_reward",
        "random_reward",
        "oracle_reward",
        "ppo_feasible",
    ]
    STATES_COLUMNS = [
        "state_id",
        "k",
        "phi",
        "q",
        "f",
        "r",
        "device_utility",
        "feasible",
        "bs_utility",
    ]
    ALPHA_SWEEP_COLUMNS = ["alpha", "bs_utility_mean", "device_utility_mean"]

    # Sweep
    DEFAULT_SWEEP_STEP = 0.05

    # Network states used when no states file is given
    REFERENCE_STATES = [
        "40, 2, 0.95, 0.73, 0.84, 0.16, 2, 12",
        "40, 2, 0.94, 0.85, 0.80, 0.20, 2, 12",
        "40, 2, 0.95, 0.81, 0.43, 0.57, 2, 13",
    ]


class NetworkConfig(BaseModel):
    """Hidden widths and initialization of the actor and critic."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    actor_hidden: tuple[int, ...] = (64, 64)
    critic_hidden: tuple[int, ...] = (64, 64)
    actor_output_gain: float = Field(default=0.01, ge=0)
    critic_output_gain: float = Field(default=1.0, ge=0)
    init_seed: int = 0

    def actor_spec(self, env: EnvConfig) -> MlpSpec:
        return MlpSpec(
            input_dim=env.feature_dim,
            hidden_layers=self.actor_hidden,
            output_dim=env.action_dim,
            init_seed=self.init_seed,
            output_gain=self.actor_output_gain,
        )

    def critic_spec(self, env: EnvConfig) -> MlpSpec:
        return MlpSpec(
            input_dim=env.feature_dim,
            hidden_layers=self.critic_hidden,
            output_dim=1,
            init_seed=self.init_seed + 1,
            output_gain=self.critic_output_gain,
        )


class OracleConfig(BaseModel):
    """Grid resolution and refinement of the exhaustive solver."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    points: int = Field(default=DEFAULT_GRID_POINTS, ge=1)
    refine_rounds: int = Field(default=DEFAULT_REFINE_ROUNDS, ge=0)
    shrink: float = Field(default=DEFAULT_SHRINK, gt=0, le=1)
    max_evaluations: int = Field(default=MAX_EVALUATIONS, ge=1)

    def grid(self, env: EnvConfig) -> GridSpec:
        return default_grid(r_max=env.r_max, points=self.points, f_min=env.f_min)


class EvaluationConfig(BaseModel):
    """Shared evaluation state set of the compare verb.

    ``test_every`` > 0 also scores the policy mean on ``test_states`` fixed
    states every that many training episodes.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    n_states: int = Field(default=100, ge=0)
    seed: int = 2024
    workers: int = Field(default=1, ge=1)
    test_every: int = Field(default=0, ge=0)
    test_states: int = Field(default=20, ge=1)


class SweepConfig(BaseModel):
    """Alpha grid and evaluation set of the alpha sweep."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    alphas: tuple[float, ...] | None = None
    step: float = Field(default=AppConfig.DEFAULT_SWEEP_STEP, gt=0, le=1)
    mode: Literal["oracle", "train"] = "oracle"
    n_states: int = Field(default=20, ge=1)
    antithetic: bool = True
    seed: int = 7

    @field_validator("alphas")
    @classmethod
    def _alphas_in_range(cls, value: tuple[float, ...] | None):
        if value is not None and any(not 0 <= a <= 1 for a in value):
            raise ValueError(f"Every alpha must lie in [0, 1], got {value}")
        return value

    def alpha_grid(self) -> list[float]:
        if self.alphas is not None:
            return list(self.alphas)
        return np.round(np.arange(0.0, 1.0 + self.step / 2, self.step), 10).tolist()


class ExperimentConfig(BaseModel):
    """Every setting of an experiment run, one section per concern."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    env: EnvConfig = Field(default_factory=EnvConfig)
    ppo: PpoConfig = Field(default_factory=PpoConfig)
    nn: NetworkConfig = Field(default_factory=NetworkConfig)
    oracle: OracleConfig = Field(default_factory=OracleConfig)
    evaluation: EvaluationConfig = Field(default_factory=EvaluationConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    output_dir: str | None = None
    seeds: tuple[int, ...] = (312, 313, 314)

    @field_validator("seeds")
    @classmethod
    def _at_least_one_seed(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if not value:
            raise ValueError("At least one seed is required")
        return value

    def with_seed(self, seed: int | None) -> ExperimentConfig:
        """The same configuration restricted to ``seed`` when one is given."""
        if seed is None:
            return self
        return self.model_copy(update={"seeds": (seed,)})


def parse_config(text: str, source: str = "<string>") -> ExperimentConfig:
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Could not parse {source}: {e}") from e
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise ConfigError(f"{source} must hold a mapping of sections")
    try:
        return ExperimentConfig.model_validate(raw)
    except ValidationError as e:
        raise ConfigError(f"Invalid configuration in {source}: {e}") from e


def load_config(path: Path | None) -> ExperimentConfig:
    """Read an experiment configuration; no path gives the defaults.

    Raises:
        ConfigError: if the file is missing, unparsable or invalid.
    """
    if path is None:
        logger.debug("No config file given, using defaults")
        return ExperimentConfig()
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Config file not found: {path}")
    config = parse_config(path.read_text(), str(path))
    logger.info(f"Loaded configuration from {path}")
    return config


def dump_config(config: ExperimentConfig) -> str:
    """Serialize the effective configuration; ``parse_config`` reads it back."""
    return yaml.safe_dump(config.model_dump(mode="json"), sort_keys=False)


def resolve_output_dir(config: ExperimentConfig, override: str | None = None) -> Path:
    """Output directory: flag, then config file, then environment, then default."""
    for candidate in (
        override,
        config.output_dir,
        os.getenv(AppConfig.OUTPUT_DIR_ENV_VAR),
    ):
        if candidate:
            return Path(candidate)
    return Path(AppConfig.DEFAULT_OUTPUT_DIR)
