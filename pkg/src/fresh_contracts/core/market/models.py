"""Data models for the data-sharing market between a base station and devices."""

from __future__ import annotations

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

PROBABILITY_TOLERANCE = 1e-9


class SlotConfig(BaseModel):
    """Cached data size and link rate, which fix the duration of one time slot."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    cached_data_size_bits: float = Field(default=24_000.0, gt=0)
    transmission_rate: float = Field(default=24_000_000.0, gt=0)

    @property
    def slot_duration(self) -> float:
        """Seconds needed to transmit the cached data once."""
        return self.cached_data_size_bits / self.transmission_rate


class FreshnessCaps(BaseModel):
    """Maximum permissible average AoI and service latency, in seconds."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    max_aoi: float = Field(gt=0)
    max_latency: float = Field(gt=0)


class UpdateCycle(BaseModel):
    """Number of time slots between two refreshes of the cached data."""

    model_config = ConfigDict(frozen=True)

    theta: float = Field(ge=1)

    @classmethod
    def from_frequency(cls, update_frequency: float) -> UpdateCycle:
        return cls(theta=1.0 / update_frequency)

    @property
    def frequency(self) -> float:
        return 1.0 / self.theta


class DeviceType(BaseModel):
    """A device type: inverse per-update cost and its share of the population."""

    model_config = ConfigDict(frozen=True)

    phi: float = Field(gt=0)
    probability: float = Field(ge=0, le=1)


class ContractItem(BaseModel):
    """One (update frequency, reward) pair offered by the base station."""

    model_config = ConfigDict(frozen=True)

    update_frequency: float = Field(gt=0, le=1)
    reward: float = Field(ge=0)

    @property
    def cycle(self) -> UpdateCycle:
        return UpdateCycle.from_frequency(self.update_frequency)


class Contract(BaseModel):
    """Contract items ordered so that item k is designed for type k."""

    model_config = ConfigDict(frozen=True)

    items: tuple[ContractItem, ...]

    @classmethod
    def from_arrays(cls, frequencies, rewards) -> Contract:
        frequencies = np.asarray(frequencies, dtype=float)
        rewards = np.asarray(rewards, dtype=float)
        if frequencies.shape != rewards.shape:
            raise ValueError(
                f"Frequency and reward arrays differ in shape: "
                f"{frequencies.shape} vs {rewards.shape}"
            )
        return cls(
            items=tuple(
                ContractItem(update_frequency=float(f), reward=float(r))
                for f, r in zip(frequencies, rewards)
            )
        )

    @property
    def frequencies(self) -> np.ndarray:
        return np.array([item.update_frequency for item in self.items])

    @property
    def rewards(self) -> np.ndarray:
        return np.array([item.reward for item in self.items])

    def __len__(self) -> int:
        return len(self.items)


def validate_type_set(types: list[DeviceType]) -> list[DeviceType]:
    """Sort a type set by phi and check that its probabilities sum to one."""
    if not types:
        raise ValueError("At least one device type is required")
    total = sum(dtype.probability for dtype in types)
    if abs(total - 1.0) > PROBABILITY_TOLERANCE:
        raise ValueError(f"Type probabilities must sum to 1, got {total!r}")
    return sorted(types, key=lambda dtype: dtype.phi)


def types_from_arrays(phi, probabilities) -> list[DeviceType]:
    """Build a sorted, validated type set from parallel phi and Q sequences."""
    phi = np.asarray(phi, dtype=float)
    probabilities = np.asarray(probabilities, dtype=float)
    if phi.shape != probabilities.shape:
        raise ValueError(
            f"phi and probabilities differ in shape: "
            f"{phi.shape} vs {probabilities.shape}"
        )
    return validate_type_set(
        [
            DeviceType(phi=float(p), probability=float(q))
            for p, q in zip(phi, probabilities)
        ]
    )


class MarketConfig(BaseModel):
    """Everything the base station knows when it designs a contract."""

    model_config = ConfigDict(frozen=True)

    device_count: int = Field(ge=1)
    unit_profit: float = Field(gt=0)
    alpha: float = Field(ge=0, le=1)
    slot: SlotConfig = Field(default_factory=SlotConfig)
    caps: FreshnessCaps
    types: tuple[DeviceType, ...]

    @field_validator("types", mode="before")
    @classmethod
    def _sorted_types(cls, value):
        types = [
            dtype if isinstance(dtype, DeviceType) else DeviceType(**dtype)
            for dtype in value
        ]
        return tuple(validate_type_set(types))

    @property
    def phi(self) -> np.ndarray:
        return np.array([dtype.phi for dtype in self.types])

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([dtype.probability for dtype in self.types])
