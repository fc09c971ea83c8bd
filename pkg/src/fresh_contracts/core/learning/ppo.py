"""
Proximal policy optimization for the contract design process.

Rollouts are collected one round at a time. Whenever the on-policy buffer
reaches the minibatch size, advantages and value targets are computed for
the stored segment, the parameters take ``update_epochs`` Adam steps on
random minibatches, and the buffer is cleared.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from fresh_contracts.core.errors import TrainingDivergedError
from fresh_contracts.core.learning.env import (
    ContractEnv,
    EnvConfig,
    NetworkState,
    decode_action,
    evaluate_contract,
    sample_state,
    state_features,
)
from fresh_contracts.core.learning.network import (
    DEFAULT_INIT_LOG_STD,
    AdamState,
    LossGradient,
    MlpSpec,
    PolicyParams,
    adam_step,
    backward,
    forward_actor,
    forward_critic,
    init_policy_params,
    squashed_log_prob,
)
from fresh_contracts.core.market.models import Contract

_ADVANTAGE_EPS = 1e-8

logger = logging.getLogger(__name__)


class PpoConfig(BaseModel):
    """Learner hyper-parameters; the episode length lives in ``EnvConfig.horizon``."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(default=0.95, ge=0, le=1)
    clip_epsilon: float = Field(default=0.2, gt=0)
    value_coef: float = Field(default=0.5, ge=0)
    minibatch_size: int = Field(default=512, ge=1)
    update_epochs: int = Field(default=40, ge=1)
    episodes: int = Field(default=500, ge=1)
    learning_rate: float = Field(default=1e-4, gt=0)
    advantage_normalization: bool = True
    init_log_std: float = DEFAULT_INIT_LOG_STD


@dataclass(frozen=True)
class Transition:
    """One stored round: input features, the action taken and what it earned."""

    features: np.ndarray
    pre_squash: np.ndarray
    raw_action: np.ndarray
    log_prob_old: float
    reward: float
    value_estimate: float
    round_index: int

    def __post_init__(self) -> None:
        if self.round_index < 1:
            raise ValueError(f"Round index starts at 1, got {self.round_index}")
        if not math.isfinite(self.log_prob_old):
            raise ValueError(f"Non-finite log-probability {self.log_prob_old}")


@dataclass
class EpisodeBuffer:
    """On-policy storage of one update segment."""

    transitions: list[Transition] = field(default_factory=list)
    advantages: np.ndarray | None = None
    value_targets: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.transitions)

    def add(self, transition: Transition) -> None:
        self.transitions.append(transition)
        self.advantages = None
        self.value_targets = None

    def clear(self) -> None:
        self.transitions.clear()
        self.advantages = None
        self.value_targets = None

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self.transitions], dtype=float)

    @property
    def values(self) -> np.ndarray:
        return np.array([t.value_estimate for t in self.transitions], dtype=float)

    def finalize(self, gamma: float) -> None:
        self.advantages = compute_gae(self, gamma)
        self.value_targets = value_targets(self, gamma)

    def as_batch(self) -> Batch:
        if self.advantages is None or self.value_targets is None:
            raise RuntimeError("Call finalize() before building a batch")
        return Batch(
            features=np.stack([t.features for t in self.transitions]),
            pre_squash=np.stack([t.pre_squash for t in self.transitions]),
            log_prob_old=np.array([t.log_prob_old for t in self.transitions]),
            advantages=self.advantages.copy(),
            value_targets=self.value_targets.copy(),
        )


@dataclass(frozen=True)
class Batch:
    """Arrays of a (mini)batch, row-aligned."""

    features: np.ndarray
    pre_squash: np.ndarray
    log_prob_old: np.ndarray
    advantages: np.ndarray
    value_targets: np.ndarray

    def __len__(self) -> int:
        return len(self.advantages)

    def take(self, indices: np.ndarray) -> Batch:
        return Batch(
            features=self.features[indices],
            pre_squash=self.pre_squash[indices],
            log_prob_old=self.log_prob_old[indices],
            advantages=self.advantages[indices],
            value_targets=self.value_targets[indices],
        )

    def normalized(self) -> Batch:
        """The same batch with advantages shifted to mean 0 and scaled to std 1."""
        a = self.advantages
        return Batch(
            features=self.features,
            pre_squash=self.pre_squash,
            log_prob_old=self.log_prob_old,
            advantages=(a - a.mean()) / (a.std() + _ADVANTAGE_EPS),
            value_targets=self.value_targets,
        )


def _discounted_suffix_sums(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """out[z] = sum over y >= z of gamma^(y - z) * rewards[y]."""
    out = np.empty_like(rewards)
    acc = 0.0
    for z in range(len(rewards) - 1, -1, -1):
        acc = rewards[z] + gamma * acc
        out[z] = acc
    return out


def _require_rounds(buffer: EpisodeBuffer) -> None:
    if not len(buffer):
        raise ValueError("Cannot estimate returns from an empty buffer")


def compute_gae(buffer: EpisodeBuffer, gamma: float) -> np.ndarray:
    """Return-to-go up to the last stored round, bootstrapped with its value.

    A(z) = gamma^(Z-z) V(s_Z) - V(s_z) + sum_{y=z}^{Z-1} gamma^(y-z) R_y,
    where Z indexes the last transition of the buffer, so A(Z) = 0.
    """
    _require_rounds(buffer)
    rewards, values = buffer.rewards, buffer.values
    n = len(rewards)
    partial = np.zeros(n)
    partial[:-1] = _discounted_suffix_sums(rewards[:-1], gamma)
    bootstrap = gamma ** np.arange(n - 1, -1, -1, dtype=float) * values[-1]
    return bootstrap - values + partial


def value_targets(buffer: EpisodeBuffer, gamma: float) -> np.ndarray:
    """Discounted reward-to-go from every round to the end of the buffer."""
    _require_rounds(buffer)
    return _discounted_suffix_sums(buffer.rewards, gamma)


def clip_function(ratio: float | np.ndarray, epsilon: float) -> float | np.ndarray:
    """Clamp the policy ratio into [1 - epsilon, 1 + epsilon]."""
    clipped = np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon)
    return float(clipped) if np.ndim(clipped) == 0 else clipped


def _ratio(params: PolicyParams, batch: Batch) -> tuple[np.ndarray, np.ndarray]:
    """Policy ratio of the stored actions, and the current actor means."""
    mean = np.atleast_2d(forward_actor(params, batch.features).mean)
    log_prob = squashed_log_prob(batch.pre_squash, mean, params.log_std)
    return np.exp(log_prob - batch.log_prob_old), mean


def surrogate_loss(batch: Batch, params: PolicyParams, epsilon: float) -> float:
    """Mean clipped surrogate objective; larger is better."""
    ratio, _ = _ratio(params, batch)
    a = batch.advantages
    return float(np.mean(np.minimum(ratio * a, clip_function(ratio, epsilon) * a)))


def value_loss(batch: Batch, params: PolicyParams) -> float:
    """Mean squared error of the critic against the value targets."""
    values = np.atleast_1d(forward_critic(params, batch.features))
    return float(np.mean((values - batch.value_targets) ** 2))


class LossBreakdown(BaseModel):
    """Loss values of one minibatch; ``total`` is the minimized quantity."""

    model_config = ConfigDict(frozen=True)

    surrogate: float
    value: float
    total: float


def loss_and_gradient(
    params: PolicyParams, batch: Batch, config: PpoConfig
) -> tuple[LossBreakdown, np.ndarray]:
    """Loss c * L_V - L_C and its gradient with respect to every parameter.

    Minimizing this loss ascends the clipped surrogate minus the weighted
    value error.
    """
    n = len(batch)
    ratio, mean = _ratio(params, batch)
    a = batch.advantages
    unclipped = ratio * a
    clipped = clip_function(ratio, config.clip_epsilon) * a
    surrogate = float(np.mean(np.minimum(unclipped, clipped)))

    # d(surrogate)/d(log_prob) per sample; zero where the clipped branch wins
    coeff = np.where(unclipped <= clipped, unclipped, 0.0) / n
    inv_var = np.exp(-2.0 * params.log_std)
    diff = batch.pre_squash - mean
    d_mean = -coeff[:, None] * diff * inv_var
    d_log_std = -np.sum(coeff[:, None] * (diff**2 * inv_var - 1.0), axis=0)

    values = np.atleast_1d(forward_critic(params, batch.features))
    residual = values - batch.value_targets
    value = float(np.mean(residual**2))
    d_value = config.value_coef * 2.0 * residual / n

    gradient = backward(
        params,
        LossGradient(
            features=batch.features,
            d_mean=d_mean,
            d_log_std=d_log_std,
            d_value=d_value,
        ),
    )
    breakdown = LossBreakdown(
        surrogate=surrogate,
        value=value,
        total=config.value_coef * value - surrogate,
    )
    return breakdown, gradient


class EpisodeLog(BaseModel):
    """One row of the training log."""

    model_config = ConfigDict(frozen=True)

    episode: int
    mean_reward: float
    feasibility_rate: float
    surrogate_loss: float
    value_loss: float
    policy_std_mean: float


@dataclass
class TrainingResult:
    params: PolicyParams
    adam: AdamState
    logs: list[EpisodeLog]
    update_count: int
    seed: int


def _mean_or_nan(values: list[float]) -> float:
    """Mean of ``values``; NaN marks an episode without parameter updates."""
    return float(np.mean(values)) if values else math.nan


def rng_streams(seed: int) -> tuple[np.random.Generator, ...]:
    """Independent environment, action-sampling and minibatch streams."""
    return tuple(
        np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(3)
    )


def _update(
    params: PolicyParams,
    adam: AdamState,
    buffer: EpisodeBuffer,
    config: PpoConfig,
    rng: np.random.Generator,
) -> tuple[PolicyParams, list[LossBreakdown]]:
    buffer.finalize(config.gamma)
    batch = buffer.as_batch()
    size = min(config.minibatch_size, len(batch))
    losses = []
    for _ in range(config.update_epochs):
        minibatch = batch.take(rng.choice(len(batch), size=size, replace=False))
        if config.advantage_normalization:
            minibatch = minibatch.normalized()
        breakdown, gradient = loss_and_gradient(params, minibatch, config)
        params = adam_step(params, gradient, adam, config.learning_rate)
        losses.append(breakdown)
    if not np.all(np.isfinite(params.vector)):
        logger.error(f"Parameters became non-finite after Adam step {adam.step}")
        raise TrainingDivergedError(
            f"Training diverged: non-finite parameters after Adam step {adam.step}"
        )
    return params, losses


def train(
    env_config: EnvConfig,
    ppo_config: PpoConfig,
    actor_spec: MlpSpec,
    critic_spec: MlpSpec,
    seed: int,
    on_episode: Callable[[EpisodeLog, PolicyParams], None] | None = None,
) -> TrainingResult:
    """Run ``episodes`` episodes of ``env_config.horizon`` rounds each.

    ``on_episode`` receives each episode's log and the parameters it ended with.
    Fully deterministic given ``seed``. Transitions left over at the end of an
    episode, fewer than a minibatch, are dropped with the buffer.

    Raises:
        TrainingDivergedError: if the parameters become non-finite.
    """
    env_rng, action_rng, batch_rng = rng_streams(seed)
    params = init_policy_params(actor_spec, critic_spec, ppo_config.init_log_std)
    adam = AdamState.zeros(params.vector.size)
    env = ContractEnv(env_config, env_rng)
    buffer = EpisodeBuffer()
    logs: list[EpisodeLog] = []
    updates = 0

    logger.info(
        f"Training for {ppo_config.episodes} episodes x {env_config.horizon} rounds "
        f"(seed {seed})"
    )
    for episode in range(1, ppo_config.episodes + 1):
        buffer.clear()
        env.reset()
        rewards = np.empty(env_config.horizon)
        feasible = np.zeros(env_config.horizon, dtype=bool)
        losses: list[LossBreakdown] = []

        for z in range(1, env_config.horizon + 1):
            features = env.features()
            sample = forward_actor(params, features, action_rng)
            value = forward_critic(params, features)
            outcome = env.step(sample.action)
            rewards[z - 1] = outcome.reward
            feasible[z - 1] = outcome.feasible
            buffer.add(
                Transition(
                    features=features,
                    pre_squash=sample.pre_squash,
                    raw_action=sample.action,
                    log_prob_old=sample.log_prob,
                    reward=outcome.reward,
                    value_estimate=value,
                    round_index=z,
                )
            )
            if len(buffer) == ppo_config.minibatch_size:
                params, update_losses = _update(
                    params, adam, buffer, ppo_config, batch_rng
                )
                losses.extend(update_losses)
                updates += 1
                buffer.clear()

        log = EpisodeLog(
            episode=episode,
            mean_reward=float(rewards.mean()),
            feasibility_rate=float(feasible.mean()),
            surrogate_loss=_mean_or_nan([b.surrogate for b in losses]),
            value_loss=_mean_or_nan([b.value for b in losses]),
            policy_std_mean=float(np.mean(np.exp(params.log_std))),
        )
        logs.append(log)
        logger.info(
            f"Episode {episode}/{ppo_config.episodes}: "
            f"mean reward {log.mean_reward:.3f}, "
            f"feasible {log.feasibility_rate:.1%}, "
            f"policy std {log.policy_std_mean:.4f}"
        )
        if on_episode is not None:
            on_episode(log, params)

    return TrainingResult(
        params=params, adam=adam, logs=logs, update_count=updates, seed=seed
    )


class EvaluationReport(BaseModel):
    """Deterministic evaluation of a policy on a fixed set of states."""

    model_config = ConfigDict(frozen=True)

    states: tuple[NetworkState, ...] = ()
    contracts: tuple[Contract, ...] = ()
    rewards: tuple[float, ...] = ()
    feasible: tuple[bool, ...] = ()
    oracle_utilities: tuple[float, ...] | None = None

    @property
    def n_states(self) -> int:
        return len(self.rewards)

    @property
    def mean_reward(self) -> float:
        return float(np.mean(self.rewards)) if self.rewards else math.nan

    @property
    def feasibility_rate(self) -> float:
        return float(np.mean(self.feasible)) if self.feasible else math.nan

    @property
    def oracle_ratio(self) -> float | None:
        """Mean policy reward over mean oracle utility, when oracle results exist."""
        if not self.oracle_utilities or not self.rewards:
            return None
        return self.mean_reward / float(np.mean(self.oracle_utilities))


def evaluate_states(
    params: PolicyParams,
    env_config: EnvConfig,
    states: list[NetworkState],
    oracle_utilities: list[float] | None = None,
) -> EvaluationReport:
    """Act with the policy mean on every state and score the contracts."""
    if oracle_utilities is not None and len(oracle_utilities) != len(states):
        raise ValueError(
            f"Got {len(oracle_utilities)} oracle utilities for {len(states)} states"
        )
    if not states:
        return EvaluationReport(
            oracle_utilities=tuple(oracle_utilities) if oracle_utilities else None
        )

    features = np.stack([state_features(s, env_config) for s in states])
    actions = np.atleast_2d(forward_actor(params, features).action)
    contracts, rewards, feasible = [], [], []
    for state, action in zip(states, actions):
        contract = decode_action(action, env_config)
        reward, ok = evaluate_contract(state, contract, env_config)
        contracts.append(contract)
        rewards.append(reward)
        feasible.append(ok)

    report = EvaluationReport(
        states=tuple(states),
        contracts=tuple(contracts),
        rewards=tuple(rewards),
        feasible=tuple(feasible),
        oracle_utilities=(
            tuple(float(u) for u in oracle_utilities)
            if oracle_utilities is not None
            else None
        ),
    )
    logger.info(
        f"Evaluated {report.n_states} states: mean reward {report.mean_reward:.3f}, "
        f"feasible {report.feasibility_rate:.1%}"
    )
    return report


def sample_states(
    env_config: EnvConfig, n_states: int, seed: int
) -> list[NetworkState]:
    rng = np.random.default_rng(seed)
    return [sample_state(env_config, rng) for _ in range(n_states)]


def evaluate(
    params: PolicyParams,
    env_config: EnvConfig,
    n_states: int,
    seed: int,
    oracle_utilities: list[float] | None = None,
) -> EvaluationReport:
    """Evaluate on ``n_states`` states freshly sampled from ``seed``."""
    return evaluate_states(
        params, env_config, sample_states(env_config, n_states, seed), oracle_utilities
    )
