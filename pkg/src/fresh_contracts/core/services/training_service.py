"""Training runs over the configured seeds, with their artifacts."""

from __future__ import annotations

import logging
from collections.abc import Callable
from pathlib import Path

import numpy as np
from pydantic import BaseModel, ConfigDict

from fresh_contracts.config import ExperimentConfig
from fresh_contracts.core.design.baselines import RandomContractDesigner
from fresh_contracts.core.learning.checkpoint import save_checkpoint
from fresh_contracts.core.learning.env import EnvConfig, evaluate_contract
from fresh_contracts.core.learning.network import PolicyParams
from fresh_contracts.core.learning.ppo import (
    EpisodeLog,
    TrainingResult,
    evaluate_states,
    sample_states,
    train,
)
from fresh_contracts.core.services.artifacts import ArtifactWriter

logger = logging.getLogger(__name__)


class TrainingRunSummary(BaseModel):
    """What one seed's training run produced."""

    model_config = ConfigDict(frozen=True)

    seed: int
    episodes: int
    updates: int
    final_mean_reward: float
    final_feasibility_rate: float
    log_path: Path
    checkpoint_path: Path
    test_rewards_path: Path | None = None


class HeldOutReward(BaseModel):
    """Deterministic policy and random rewards on fixed states after an episode."""

    model_config = ConfigDict(frozen=True)

    episode: int
    ppo_reward: float
    random_reward: float
    ppo_feasibility_rate: float


class HeldOutRewardRecorder:
    """Episode callback scoring the policy mean every ``every`` episodes."""

    def __init__(self, config: ExperimentConfig, every: int) -> None:
        evaluation = config.evaluation
        self.env = config.env
        self.every = every
        self.states = sample_states(self.env, evaluation.test_states, evaluation.seed)
        designer = RandomContractDesigner(
            self.env, np.random.default_rng([evaluation.seed, 1])
        )
        self.random_reward = float(
            np.mean(
                [
                    evaluate_contract(state, designer.design(state), self.env)[0]
                    for state in self.states
                ]
            )
        )
        self.rows: list[HeldOutReward] = []

    def __call__(self, log: EpisodeLog, params: PolicyParams) -> None:
        if log.episode % self.every:
            return
        report = evaluate_states(params, self.env, self.states)
        self.rows.append(
            HeldOutReward(
                episode=log.episode,
                ppo_reward=report.mean_reward,
                random_reward=self.random_reward,
                ppo_feasibility_rate=report.feasibility_rate,
            )
        )


class TrainingService:
    """Service for training one policy per seed and persisting the results."""

    def __init__(self, config: ExperimentConfig, writer: ArtifactWriter) -> None:
        self._config = config
        self._writer = writer

    def train_policy(
        self,
        seed: int,
        env: EnvConfig | None = None,
        on_episode: Callable[[EpisodeLog, PolicyParams], None] | None = None,
    ) -> TrainingResult:
        """Train with the configured learner, optionally in another environment."""
        env = env or self._config.env
        return train(
            env,
            self._config.ppo,
            self._config.nn.actor_spec(env),
            self._config.nn.critic_spec(env),
            seed,
            on_episode=on_episode,
        )

    def run_seed(self, seed: int) -> TrainingRunSummary:
        every = self._config.evaluation.test_every
        recorder = HeldOutRewardRecorder(self._config, every) if every else None
        result = self.train_policy(seed, on_episode=recorder)
        log_path = self._writer.write_training_log(result.logs, seed)
        checkpoint_path = save_checkpoint(
            self._writer.checkpoint_path(seed), result.params, result.adam
        )
        test_rewards_path = (
            self._writer.write_test_rewards(recorder.rows, seed) if recorder else None
        )
        last = result.logs[-1]
        logger.info(
            f"Seed {seed}: {result.update_count} updates, final mean reward "
            f"{last.mean_reward:.3f}, feasible {last.feasibility_rate:.1%}"
        )
        return TrainingRunSummary(
            seed=seed,
            episodes=len(result.logs),
            updates=result.update_count,
            final_mean_reward=last.mean_reward,
            final_feasibility_rate=last.feasibility_rate,
            log_path=log_path,
            checkpoint_path=checkpoint_path,
            test_rewards_path=test_rewards_path,
        )

    def run(self) -> list[TrainingRunSummary]:
        self._writer.write_config(self._config)
        return [self.run_seed(seed) for seed in self._config.seeds]
