"""
Contract design as a decision process.

Each round the network state (caps, type distribution, type values) is drawn
afresh; the base station answers with a contract and earns its utility when
the contract satisfies IR and IC, or a flat penalty otherwise. No action
influences the next state, so the episode is a sequence of independent
contexts.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from fresh_contracts.core.errors import DomainError
from fresh_contracts.core.market.contract import bs_utility, is_feasible
from fresh_contracts.core.market.models import (
    PROBABILITY_TOLERANCE,
    Contract,
    DeviceType,
    FreshnessCaps,
    MarketConfig,
    SlotConfig,
)

logger = logging.getLogger(__name__)


class EnvConfig(BaseModel):
    """Sampling ranges, utility constants and action box of the environment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    device_count: int = Field(default=40, ge=1)
    type_count: int = Field(default=2, ge=1)
    phi_range: tuple[float, float] = (1.0, 15.0)
    phi_bounds: tuple[tuple[float, float], ...] | None = None
    cap_bounds: tuple[float, float] = (0.5, 1.0)
    alpha: float = Field(default=0.75, ge=0, le=1)
    unit_profit: float = Field(default=100.0, gt=0)
    penalty: float = Field(default=-500.0, lt=0)
    horizon: int = Field(default=1024, ge=1)
    f_min: float = Field(default=0.01, gt=0, lt=1)
    r_max: float = Field(default=2.0, gt=0)
    slot: SlotConfig = Field(default_factory=SlotConfig)
    seed: int = 312

    @field_validator("phi_range", "cap_bounds")
    @classmethod
    def _positive_interval(cls, value: tuple[float, float]) -> tuple[float, float]:
        lo, hi = value
        if not 0 < lo < hi:
            raise ValueError(f"Interval must satisfy 0 < low < high, got {value}")
        return value

    @model_validator(mode="after")
    def _check_phi_bounds(self) -> EnvConfig:
        if self.phi_bounds is None:
            return self
        if len(self.phi_bounds) != self.type_count:
            raise ValueError(
                f"phi_bounds has {len(self.phi_bounds)} intervals "
                f"for {self.type_count} types"
            )
        for lo, hi in self.phi_bounds:
            if not 0 < lo < hi:
                raise ValueError(f"Invalid phi interval ({lo}, {hi})")
        return self

    def type_phi_bounds(self) -> list[tuple[float, float]]:
        """Per-type phi intervals; by default contiguous slices of ``phi_range``."""
        if self.phi_bounds is not None:
            return list(self.phi_bounds)
        edges = np.linspace(*self.phi_range, self.type_count + 1)
        return [(float(lo), float(hi)) for lo, hi in zip(edges[:-1], edges[1:])]

    @property
    def action_dim(self) -> int:
        return 2 * self.type_count

    @property
    def feature_dim(self) -> int:
        return 2 * self.type_count + 2


class NetworkState(BaseModel):
    """One sampled network state, laid out as [M, K, A_max, D_max, Q..., phi...]."""

    model_config = ConfigDict(frozen=True)

    device_count: int = Field(ge=1)
    type_count: int = Field(ge=1)
    max_aoi: float = Field(gt=0)
    max_latency: float = Field(gt=0)
    probabilities: tuple[float, ...]
    phi: tuple[float, ...]

    @model_validator(mode="after")
    def _check_types(self) -> NetworkState:
        k = self.type_count
        if len(self.probabilities) != k or len(self.phi) != k:
            raise ValueError(
                f"Expected {self.type_count} probabilities and phi values, got "
                f"{len(self.probabilities)} and {len(self.phi)}"
            )
        if any(q < 0 for q in self.probabilities):
            raise ValueError("Type probabilities must be non-negative")
        total = sum(self.probabilities)
        if abs(total - 1.0) > PROBABILITY_TOLERANCE:
            raise ValueError(f"Type probabilities must sum to 1, got {total!r}")
        if any(p <= 0 for p in self.phi):
            raise ValueError("Type values phi must be positive")
        if any(b < a for a, b in zip(self.phi, self.phi[1:])):
            raise ValueError("Type values phi must be sorted ascending")
        return self

    @classmethod
    def from_row(cls, row) -> NetworkState:
        values = [float(v) for v in row]
        if len(values) < 2:
            raise ValueError("State row needs at least M and K")
        device_count, type_count = values[0], values[1]
        if device_count != int(device_count) or type_count != int(type_count):
            raise ValueError(f"M and K must be integers, got {values[:2]}")
        k = int(type_count)
        if len(values) != 4 + 2 * k:
            raise ValueError(
                f"State row with K={k} needs {4 + 2 * k} values, got {len(values)}"
            )
        return cls(
            device_count=int(device_count),
            type_count=k,
            max_aoi=values[2],
            max_latency=values[3],
            probabilities=tuple(values[4 : 4 + k]),
            phi=tuple(values[4 + k :]),
        )

    def as_row(self) -> list[float]:
        return [
            self.device_count,
            self.type_count,
            self.max_aoi,
            self.max_latency,
            *self.probabilities,
            *self.phi,
        ]

    @property
    def caps(self) -> FreshnessCaps:
        return FreshnessCaps(max_aoi=self.max_aoi, max_latency=self.max_latency)

    @property
    def types(self) -> list[DeviceType]:
        return [
            DeviceType(phi=p, probability=q)
            for p, q in zip(self.phi, self.probabilities)
        ]


@dataclass(frozen=True)
class ActionVector:
    """Raw network output: K frequency coordinates then K reward coordinates."""

    raw: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "raw", np.asarray(self.raw, dtype=float).ravel())


class StepOutcome(BaseModel):
    """Reward and successor state of one round."""

    model_config = ConfigDict(frozen=True)

    reward: float
    feasible: bool
    contract: Contract
    next_state: NetworkState


def sample_state(config: EnvConfig, rng: np.random.Generator) -> NetworkState:
    """Draw a network state: per-type phi, Dirichlet Q, then the two caps."""
    phi = np.sort([rng.uniform(lo, hi) for lo, hi in config.type_phi_bounds()])
    probabilities = rng.dirichlet(np.ones(config.type_count))
    max_aoi = rng.uniform(*config.cap_bounds)
    max_latency = rng.uniform(*config.cap_bounds)
    return NetworkState(
        device_count=config.device_count,
        type_count=config.type_count,
        max_aoi=float(max_aoi),
        max_latency=float(max_latency),
        probabilities=tuple(probabilities.tolist()),
        phi=tuple(phi.tolist()),
    )


def check_state(state: NetworkState, config: EnvConfig) -> NetworkState:
    """Reject states whose type count differs from the configured one.

    Caps outside the sampling interval are accepted with a warning, since the
    features then fall outside [0, 1] but stay well defined.
    """
    if state.type_count != config.type_count:
        raise ValueError(
            f"State has K={state.type_count} but the model was built for "
            f"K={config.type_count}"
        )
    lo, hi = config.cap_bounds
    if not (lo <= state.max_aoi <= hi and lo <= state.max_latency <= hi):
        logger.warning(
            f"State caps ({state.max_aoi}, {state.max_latency}) lie outside "
            f"the sampling interval [{lo}, {hi}]"
        )
    return state


def mirror_caps(state: NetworkState) -> NetworkState:
    """The same state with the AoI and latency caps swapped."""
    return state.model_copy(
        update={"max_aoi": state.max_latency, "max_latency": state.max_aoi}
    )


def market_from_state(state: NetworkState, config: EnvConfig) -> MarketConfig:
    return MarketConfig(
        device_count=state.device_count,
        unit_profit=config.unit_profit,
        alpha=config.alpha,
        slot=config.slot,
        caps=state.caps,
        types=state.types,
    )


def decode_action(raw: ActionVector | np.ndarray, config: EnvConfig) -> Contract:
    """Map raw coordinates in [-1, 1] affinely onto the contract box."""
    values = raw.raw if isinstance(raw, ActionVector) else np.asarray(raw, dtype=float)
    if values.size != config.action_dim:
        raise ValueError(
            f"Action has {values.size} coordinates, expected {config.action_dim}"
        )
    unit = (np.clip(values, -1.0, 1.0) + 1.0) / 2.0
    k = config.type_count
    frequencies = np.minimum(config.f_min + unit[:k] * (1.0 - config.f_min), 1.0)
    rewards = unit[k:] * config.r_max
    return Contract.from_arrays(frequencies, rewards)


def evaluate_contract(
    state: NetworkState, contract: Contract, config: EnvConfig
) -> tuple[float, bool]:
    """Reward of offering ``contract`` in ``state`` and whether it was feasible."""
    if not is_feasible(contract, state.types):
        return config.penalty, False
    try:
        return bs_utility(contract, market_from_state(state, config)), True
    except DomainError as e:
        logger.debug(f"Contract outside the QoD domain, penalized: {e}")
        return config.penalty, False


def step(
    state: NetworkState,
    raw: ActionVector | np.ndarray,
    config: EnvConfig,
    rng: np.random.Generator,
) -> StepOutcome:
    contract = decode_action(raw, config)
    reward, feasible = evaluate_contract(state, contract, config)
    return StepOutcome(
        reward=reward,
        feasible=feasible,
        contract=contract,
        next_state=sample_state(config, rng),
    )


def state_features(state: NetworkState, config: EnvConfig) -> np.ndarray:
    """Network input: caps rescaled to [0, 1], Q as-is, phi over the phi range top."""
    lo, hi = config.cap_bounds
    caps = (np.array([state.max_aoi, state.max_latency]) - lo) / (hi - lo)
    phi = np.asarray(state.phi) / config.phi_range[1]
    return np.concatenate([caps, np.asarray(state.probabilities), phi])


class ContractEnv:
    """Stateful wrapper owning the RNG stream and the current state."""

    def __init__(
        self, config: EnvConfig, rng: np.random.Generator | None = None
    ) -> None:
        self.config = config
        self.rng = rng if rng is not None else np.random.default_rng(config.seed)
        self.state: NetworkState | None = None

    def reset(self) -> NetworkState:
        self.state = sample_state(self.config, self.rng)
        return self.state

    def features(self) -> np.ndarray:
        if self.state is None:
            raise RuntimeError("Call reset() before reading features")
        return state_features(self.state, self.config)

    def step(self, raw: ActionVector | np.ndarray) -> StepOutcome:
        if self.state is None:
            raise RuntimeError("Call reset() before step()")
        outcome = step(self.state, raw, self.config, self.rng)
        self.state = outcome.next_state
        return outcome
