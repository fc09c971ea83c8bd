"""
Contract design strategies.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import TYPE_CHECKING

from fresh_contracts.core.market.models import Contract

if TYPE_CHECKING:
    from fresh_contracts.core.learning.env import NetworkState


class ContractDesigner(ABC):
    """Abstract base class for anything that turns a network state into a contract."""

    name: str = "designer"

    @abstractmethod
    def design(self, state: NetworkState) -> Contract:
        """Design a contract for the given network state."""
        pass
