"""Contract designer backed by a trained actor network."""

from __future__ import annotations

from fresh_contracts.core.design.strategy import ContractDesigner
from fresh_contracts.core.learning.env import (
    EnvConfig,
    NetworkState,
    check_state,
    decode_action,
    state_features,
)
from fresh_contracts.core.learning.network import PolicyParams, forward_actor
from fresh_contracts.core.market.models import Contract


class PolicyContractDesigner(ContractDesigner):
    """Acts with the policy mean, so the same state always gets the same contract."""

    name = "ppo"

    def __init__(self, params: PolicyParams, config: EnvConfig) -> None:
        if params.action_dim != config.action_dim:
            raise ValueError(
                f"Policy emits {params.action_dim} coordinates but the environment "
                f"expects {config.action_dim}"
            )
        self.params = params
        self.config = config

    def design(self, state: NetworkState) -> Contract:
        features = state_features(check_state(state, self.config), self.config)
        return decode_action(forward_actor(self.params, features).action, self.config)
