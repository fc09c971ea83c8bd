"""Market model: data freshness, device types, contracts and utilities."""

from .contract import (
    bs_utility,
    check_ic,
    check_ir,
    device_utility,
    is_feasible,
    mean_device_utility,
)
from .models import (
    Contract,
    ContractItem,
    DeviceType,
    FreshnessCaps,
    MarketConfig,
    SlotConfig,
    UpdateCycle,
    types_from_arrays,
)
from .qod import (
    aoi_impact,
    average_aoi,
    average_latency,
    latency_impact,
    qod_log_argument,
    qod_score,
)

__all__ = [
    "Contract",
    "ContractItem",
    "DeviceType",
    "FreshnessCaps",
    "MarketConfig",
    "SlotConfig",
    "UpdateCycle",
    "aoi_impact",
    "average_aoi",
    "average_latency",
    "bs_utility",
    "check_ic",
    "check_ir",
    "device_utility",
    "is_feasible",
    "latency_impact",
    "mean_device_utility",
    "qod_log_argument",
    "qod_score",
    "types_from_arrays",
]
