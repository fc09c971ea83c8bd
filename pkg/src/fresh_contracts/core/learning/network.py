"""
Small feedforward actor and critic with hand-derived gradients.

The actor is a tanh MLP producing the mean of a diagonal Gaussian over the
pre-squash action, with a state-independent learned log-std; samples are
squashed with tanh into [-1, 1]. The critic is a separate tanh MLP with a
scalar output. All parameters live in one flat vector laid out as
[actor layers | log-std | critic layers], each layer stored as W (in x out)
followed by b (out).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

LOG_STD_MIN = -5.0
LOG_STD_MAX = 1.0
DEFAULT_INIT_LOG_STD = -0.5
_HALF_LOG_TWO_PI = 0.5 * math.log(2.0 * math.pi)
_LOG_TWO = math.log(2.0)


class MlpSpec(BaseModel):
    """Shape and initialization of one feedforward network."""

    model_config = ConfigDict(frozen=True)

    input_dim: int = Field(ge=1)
    hidden_layers: tuple[int, ...] = (64, 64)
    output_dim: int = Field(ge=1)
    activation: Literal["tanh"] = "tanh"
    init_seed: int = 0
    output_gain: float = Field(default=1.0, ge=0)

    @field_validator("hidden_layers")
    @classmethod
    def _positive_widths(cls, value: tuple[int, ...]) -> tuple[int, ...]:
        if any(width < 1 for width in value):
            raise ValueError(f"Hidden layer widths must be positive, got {value}")
        return value

    def layer_shapes(self) -> list[tuple[int, int]]:
        dims = [self.input_dim, *self.hidden_layers, self.output_dim]
        return list(zip(dims[:-1], dims[1:]))

    @property
    def param_count(self) -> int:
        return sum(n_in * n_out + n_out for n_in, n_out in self.layer_shapes())


class Mlp:
    """Forward and backward passes of a tanh MLP over a flat weight vector."""

    def __init__(self, spec: MlpSpec) -> None:
        self.spec = spec
        self.shapes = spec.layer_shapes()
        self.offsets: list[tuple[int, int, int]] = []
        offset = 0
        for n_in, n_out in self.shapes:
            mid = offset + n_in * n_out
            self.offsets.append((offset, mid, mid + n_out))
            offset = mid + n_out
        self.size = offset

    def _layer(self, weights: np.ndarray, index: int) -> tuple[np.ndarray, np.ndarray]:
        start, mid, end = self.offsets[index]
        n_in, n_out = self.shapes[index]
        return weights[start:mid].reshape(n_in, n_out), weights[mid:end]

    def init_weights(self, rng: np.random.Generator) -> np.ndarray:
        weights = np.zeros(self.size)
        last = len(self.shapes) - 1
        for index, (n_in, n_out) in enumerate(self.shapes):
            start, mid, _ = self.offsets[index]
            scale = 1.0 / math.sqrt(n_in)
            if index == last:
                scale *= self.spec.output_gain
            weights[start:mid] = rng.normal(0.0, scale, n_in * n_out)
        return weights

    def forward(
        self, weights: np.ndarray, x: np.ndarray
    ) -> tuple[np.ndarray, list[np.ndarray]]:
        """Returns the output and the inputs seen by every layer."""
        cache = [x]
        activation = x
        last = len(self.shapes) - 1
        for index in range(len(self.shapes)):
            w, b = self._layer(weights, index)
            z = activation @ w + b
            activation = z if index == last else np.tanh(z)
            if index != last:
                cache.append(activation)
        return activation, cache

    def backward(
        self, weights: np.ndarray, cache: list[np.ndarray], grad_out: np.ndarray
    ) -> np.ndarray:
        grad = np.zeros(self.size)
        g = grad_out
        for index in reversed(range(len(self.shapes))):
            start, mid, end = self.offsets[index]
            w, _ = self._layer(weights, index)
            layer_input = cache[index]
            grad[start:mid] = (layer_input.T @ g).ravel()
            grad[mid:end] = g.sum(axis=0)
            if index > 0:
                g = (g @ w.T) * (1.0 - layer_input**2)
        return grad


@dataclass
class PolicyParams:
    """Flat actor/critic parameter vector with named views."""

    actor_spec: MlpSpec
    critic_spec: MlpSpec
    vector: np.ndarray
    actor: Mlp = field(init=False, repr=False)
    critic: Mlp = field(init=False, repr=False)

    def __post_init__(self) -> None:
        self.actor = Mlp(self.actor_spec)
        self.critic = Mlp(self.critic_spec)
        if self.critic_spec.output_dim != 1:
            raise ValueError("Critic must have a single output")
        expected = (
            self.actor_spec.param_count
            + self.actor_spec.output_dim
            + self.critic_spec.param_count
        )
        self.vector = np.asarray(self.vector, dtype=float)
        assert self.vector.shape == (expected,), (
            f"Parameter vector has shape {self.vector.shape}, expected ({expected},)"
        )

    @property
    def action_dim(self) -> int:
        return self.actor_spec.output_dim

    @property
    def actor_slice(self) -> slice:
        return slice(0, self.actor.size)

    @property
    def log_std_slice(self) -> slice:
        return slice(self.actor.size, self.actor.size + self.action_dim)

    @property
    def critic_slice(self) -> slice:
        return slice(self.actor.size + self.action_dim, self.vector.size)

    @property
    def log_std(self) -> np.ndarray:
        return self.vector[self.log_std_slice]

    def copy(self) -> PolicyParams:
        return PolicyParams(self.actor_spec, self.critic_spec, self.vector.copy())


@dataclass
class AdamState:
    """First/second moment estimates of the adaptive-moment optimizer."""

    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, size: int) -> AdamState:
        return cls(m=np.zeros(size), v=np.zeros(size))


@dataclass(frozen=True)
class GaussianAction:
    """A policy evaluation: distribution, pre-squash draw, squashed action, log-prob."""

    mean: np.ndarray
    log_std: np.ndarray
    pre_squash: np.ndarray
    action: np.ndarray
    log_prob: np.ndarray | float


@dataclass(frozen=True)
class LossGradient:
    """Gradient of a scalar loss w.r.t. the network outputs on a batch."""

    features: np.ndarray
    d_mean: np.ndarray | None = None
    d_log_std: np.ndarray | None = None
    d_value: np.ndarray | None = None


def init_policy_params(
    actor_spec: MlpSpec,
    critic_spec: MlpSpec,
    init_log_std: float = DEFAULT_INIT_LOG_STD,
) -> PolicyParams:
    actor = Mlp(actor_spec)
    critic = Mlp(critic_spec)
    vector = np.concatenate(
        [
            actor.init_weights(np.random.default_rng(actor_spec.init_seed)),
            np.full(
                actor_spec.output_dim,
                np.clip(init_log_std, LOG_STD_MIN, LOG_STD_MAX),
            ),
            critic.init_weights(np.random.default_rng(critic_spec.init_seed)),
        ]
    )
    return PolicyParams(actor_spec, critic_spec, vector)


def _as_batch(features: np.ndarray, expected: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(features, dtype=float)
    single = x.ndim == 1
    x = x[None, :] if single else x
    if x.ndim != 2 or x.shape[1] != expected:
        raise ValueError(f"Expected features of width {expected}, got shape {x.shape}")
    return x, single


def gaussian_log_prob(
    pre_squash: np.ndarray, mean: np.ndarray, log_std: np.ndarray
) -> np.ndarray:
    """Diagonal Gaussian log-density, summed over the last axis."""
    z = (pre_squash - mean) * np.exp(-log_std)
    return np.sum(-0.5 * z**2 - log_std - _HALF_LOG_TWO_PI, axis=-1)


def squash_correction(pre_squash: np.ndarray) -> np.ndarray:
    """Sum of log(1 - tanh(u)^2), evaluated stably."""
    u = np.asarray(pre_squash)
    return np.sum(2.0 * (_LOG_TWO - u - np.logaddexp(0.0, -2.0 * u)), axis=-1)


def squashed_log_prob(
    pre_squash: np.ndarray, mean: np.ndarray, log_std: np.ndarray
) -> np.ndarray:
    return gaussian_log_prob(pre_squash, mean, log_std) - squash_correction(pre_squash)


def forward_actor(
    params: PolicyParams,
    features: np.ndarray,
    rng: np.random.Generator | None = None,
) -> GaussianAction:
    """Evaluate the policy; samples when ``rng`` is given, else acts with the mean."""
    x, single = _as_batch(features, params.actor_spec.input_dim)
    mean, _ = params.actor.forward(params.vector[params.actor_slice], x)
    log_std = params.log_std.copy()
    if rng is None:
        pre_squash = mean.copy()
    else:
        pre_squash = mean + np.exp(log_std) * rng.standard_normal(mean.shape)
    log_prob = squashed_log_prob(pre_squash, mean, log_std)
    action = np.tanh(pre_squash)
    if single:
        return GaussianAction(
            mean[0], log_std, pre_squash[0], action[0], float(log_prob[0])
        )
    return GaussianAction(mean, log_std, pre_squash, action, log_prob)


def forward_critic(params: PolicyParams, features: np.ndarray) -> float | np.ndarray:
    x, single = _as_batch(features, params.critic_spec.input_dim)
    value, _ = params.critic.forward(params.vector[params.critic_slice], x)
    return float(value[0, 0]) if single else value[:, 0]


def backward(params: PolicyParams, loss_gradient: LossGradient) -> np.ndarray:
    """Back-propagate output gradients to a flat parameter gradient."""
    grad = np.zeros_like(params.vector)
    x, _ = _as_batch(loss_gradient.features, params.actor_spec.input_dim)
    if loss_gradient.d_mean is not None:
        _, cache = params.actor.forward(params.vector[params.actor_slice], x)
        d_mean = np.asarray(loss_gradient.d_mean, dtype=float).reshape(len(x), -1)
        grad[params.actor_slice] = params.actor.backward(
            params.vector[params.actor_slice], cache, d_mean
        )
    if loss_gradient.d_log_std is not None:
        grad[params.log_std_slice] = loss_gradient.d_log_std
    if loss_gradient.d_value is not None:
        _, cache = params.critic.forward(params.vector[params.critic_slice], x)
        d_value = np.asarray(loss_gradient.d_value, dtype=float).reshape(len(x), 1)
        grad[params.critic_slice] = params.critic.backward(
            params.vector[params.critic_slice], cache, d_value
        )
    return grad


def adam_step(
    params: PolicyParams,
    gradient: np.ndarray,
    state: AdamState,
    learning_rate: float,
) -> PolicyParams:
    """One bias-corrected adaptive-moment descent step.

    ``state`` is updated in place; log-std entries are clamped afterwards.
    """
    if gradient.shape != params.vector.shape:
        raise ValueError(
            f"Gradient shape {gradient.shape} does not match parameters "
            f"{params.vector.shape}"
        )
    state.step += 1
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient**2
    m_hat = state.m / (1.0 - state.beta1**state.step)
    v_hat = state.v / (1.0 - state.beta2**state.step)
    vector = params.vector - learning_rate * m_hat / (np.sqrt(v_hat) + state.eps)
    vector[params.log_std_slice] = np.clip(
        vector[params.log_std_slice], LOG_STD_MIN, LOG_STD_MAX
    )
    return PolicyParams(params.actor_spec, params.critic_spec, vector)
