"""Device and base-station utilities, and IR/IC feasibility of a contract."""

from __future__ import annotations

import logging
from collections.abc import Sequence

import numpy as np

from fresh_contracts.core.errors import ContractShapeError
from fresh_contracts.core.market.models import (
    Contract,
    ContractItem,
    DeviceType,
    MarketConfig,
)
from fresh_contracts.core.market.qod import qod_score

# IR/IC comparisons absorb roundoff at binding constraints.
CONSTRAINT_TOLERANCE = 1e-12

logger = logging.getLogger(__name__)


def device_utility(item: ContractItem, dtype: DeviceType) -> float:
    """Reward minus update cost for a device of ``dtype`` accepting ``item``."""
    return item.reward - item.update_frequency / dtype.phi


def _check_shapes(contract: Contract, types: Sequence[DeviceType]) -> None:
    if len(contract) != len(types):
        raise ContractShapeError(
            f"Contract has {len(contract)} items but there are {len(types)} types"
        )


def utility_matrix(contract: Contract, types: Sequence[DeviceType]) -> np.ndarray:
    """Entry (k, j) is the utility a type-k device gets from item j."""
    _check_shapes(contract, types)
    phi = np.array([dtype.phi for dtype in types])
    return contract.rewards[None, :] - contract.frequencies[None, :] / phi[:, None]


def check_ir(contract: Contract, types: Sequence[DeviceType]) -> list[bool]:
    """Individual rationality per type: own-item utility is non-negative."""
    own = np.diag(utility_matrix(contract, types))
    return [bool(u >= -CONSTRAINT_TOLERANCE) for u in own]


def check_ic(contract: Contract, types: Sequence[DeviceType]) -> list[list[bool]]:
    """Incentive compatibility matrix.

    Entry (k, j) is true iff a type-k device weakly prefers its own item to
    item j. Diagonal entries are true by convention, leaving K(K-1)
    meaningful comparisons.
    """
    utilities = utility_matrix(contract, types)
    own = np.diag(utilities)[:, None]
    satisfied = own >= utilities - CONSTRAINT_TOLERANCE
    np.fill_diagonal(satisfied, True)
    return satisfied.tolist()


def is_feasible(contract: Contract, types: Sequence[DeviceType]) -> bool:
    """Whether the contract meets every IR, IC and sign constraint."""
    try:
        ir = check_ir(contract, types)
        ic = check_ic(contract, types)
    except ContractShapeError as e:
        logger.debug(f"Treating mis-shaped contract as infeasible: {e}")
        return False

    signs_ok = (
        bool(np.all(contract.frequencies >= 0))
        and bool(np.all(contract.rewards >= 0))
        and all(dtype.phi > 0 for dtype in types)
    )
    return signs_ok and all(ir) and all(all(row) for row in ic)


def bs_utility(contract: Contract, market: MarketConfig) -> float:
    """Expected profit of the base station over all M devices.

    Raises:
        DomainError: if any item's update frequency has no valid QoD.
    """
    _check_shapes(contract, market.types)
    theta = 1.0 / contract.frequencies
    qod = qod_score(theta, market.slot, market.caps, market.alpha)
    margin = market.unit_profit * qod - contract.rewards
    return float(market.device_count * np.sum(market.probabilities * margin))


def mean_device_utility(contract: Contract, types: Sequence[DeviceType]) -> float:
    """Population-weighted utility of devices taking their own items."""
    own = np.diag(utility_matrix(contract, types))
    probabilities = np.array([dtype.probability for dtype in types])
    return float(np.sum(probabilities * own))
