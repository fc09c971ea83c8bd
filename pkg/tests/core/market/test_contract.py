"""Tests for contract utilities and the IR/IC checks."""

from __future__ import annotations

import numpy as np
import pytest
from pydantic import ValidationError

from fresh_contracts.core.errors import ContractShapeError, DomainError
from fresh_contracts.core.market.contract import (
    bs_utility,
    check_ic,
    check_ir,
    device_utility,
    is_feasible,
    mean_device_utility,
    utility_matrix,
)
from fresh_contracts.core.market.models import (
    Contract,
    ContractItem,
    DeviceType,
    FreshnessCaps,
    MarketConfig,
    SlotConfig,
    types_from_arrays,
)
from fresh_contracts.core.market.qod import qod_score


def two_type_market(phi=(2.0, 12.0), q=(0.84, 0.16)) -> MarketConfig:
    return MarketConfig(
        device_count=40,
        unit_profit=100.0,
        alpha=0.75,
        caps=FreshnessCaps(max_aoi=0.95, max_latency=0.73),
        types=types_from_arrays(phi, q),
    )


class TestModels:
    """Test cases for the market data models."""

    def test_types_are_sorted_by_phi(self) -> None:
        market = two_type_market(phi=(12.0, 2.0), q=(0.16, 0.84))
        assert market.phi.tolist() == [2.0, 12.0]
        assert market.probabilities.tolist() == [0.84, 0.16]

    def test_probabilities_must_sum_to_one(self) -> None:
        with pytest.raises(ValueError, match="sum to 1"):
            types_from_arrays((2.0, 12.0), (0.5, 0.6))

    @pytest.mark.parametrize(
        "frequency,reward",
        [(0.0, 0.1), (1.5, 0.1), (0.5, -0.1)],
    )
    def test_item_bounds(self, frequency: float, reward: float) -> None:
        with pytest.raises(ValidationError):
            ContractItem(update_frequency=frequency, reward=reward)

    def test_contract_from_arrays_keeps_order(self) -> None:
        contract = Contract.from_arrays([0.2, 0.5], [0.1, 0.2])
        assert contract.frequencies.tolist() == [0.2, 0.5]
        assert contract.rewards.tolist() == [0.1, 0.2]
        assert len(contract) == 2

    def test_contract_from_mismatched_arrays(self) -> None:
        with pytest.raises(ValueError, match="differ in shape"):
            Contract.from_arrays([0.2, 0.5], [0.1])


class TestDeviceUtility:
    @pytest.mark.parametrize(
        "reward,frequency,phi,expected",
        [
            (0.5, 1.0, 2.0, 0.0),
            (0.2, 0.5, 12.0, 0.2 - 0.5 / 12.0),
            (0.0, 0.3, 1.0, -0.3),
        ],
    )
    def test_reward_minus_cost(
        self, reward: float, frequency: float, phi: float, expected: float
    ) -> None:
        item = ContractItem(update_frequency=frequency, reward=reward)
        utility = device_utility(item, DeviceType(phi=phi, probability=1.0))
        assert utility == pytest.approx(expected, abs=1e-15)

    def test_second_worked_value(self) -> None:
        item = ContractItem(update_frequency=0.5, reward=0.2)
        utility = device_utility(item, DeviceType(phi=12.0, probability=1.0))
        assert utility == pytest.approx(0.2 - 0.5 / 12.0, abs=1e-12)
        assert utility == pytest.approx(0.158333, abs=1e-6)

    def test_utility_matrix_rows_are_types(self) -> None:
        contract = Contract.from_arrays([0.2, 0.5], [0.1, 0.2])
        types = types_from_arrays((2.0, 12.0), (0.5, 0.5))
        matrix = utility_matrix(contract, types)
        assert matrix.shape == (2, 2)
        assert matrix[1, 0] == pytest.approx(0.1 - 0.2 / 12.0)


class TestConstraints:
    """Test cases for individual rationality and incentive compatibility."""

    def test_ir_binding_holds(self) -> None:
        contract = Contract.from_arrays([1.0], [0.5])
        assert check_ir(contract, [DeviceType(phi=2.0, probability=1.0)]) == [True]

    def test_ir_violation(self) -> None:
        contract = Contract.from_arrays([1.0], [0.4])
        assert check_ir(contract, [DeviceType(phi=2.0, probability=1.0)]) == [False]

    @pytest.mark.parametrize("phi", [3.0, 7.0, 11.0, 13.7])
    def test_ir_tolerates_roundoff_at_the_boundary(self, phi: float) -> None:
        """Test that r = f/phi computed in floating point still counts as IR."""
        contract = Contract.from_arrays([0.3], [0.3 / phi])
        assert check_ir(contract, [DeviceType(phi=phi, probability=1.0)]) == [True]

    def test_separating_contract_is_feasible(self) -> None:
        contract = Contract.from_arrays([0.2, 0.5], [0.1, 0.2])
        types = types_from_arrays((2.0, 12.0), (0.5, 0.5))
        assert check_ir(contract, types) == [True, True]
        assert check_ic(contract, types) == [[True, True], [True, True]]
        assert is_feasible(contract, types)

    def test_ic_violation_with_equal_types(self) -> None:
        """Test that a type-2 device envies item 1 when both types share phi."""
        contract = Contract.from_arrays([0.2, 0.5], [0.1, 0.2])
        types = types_from_arrays((2.0, 2.0), (0.5, 0.5))
        ic = check_ic(contract, types)
        assert ic[1][0] is False
        assert ic[0][1] is True
        assert not is_feasible(contract, types)

    def test_ic_diagonal_is_true(self) -> None:
        contract = Contract.from_arrays([1.0, 1.0, 1.0], [0.0, 0.0, 0.0])
        types = types_from_arrays((1.0, 2.0, 3.0), (0.2, 0.3, 0.5))
        ic = check_ic(contract, types)
        assert all(ic[k][k] for k in range(3))

    def test_pooled_contract_is_feasible(self) -> None:
        """Test that identical items satisfy IC and IR for every phi >= 1."""
        contract = Contract.from_arrays([0.505, 0.505], [1.0, 1.0])
        types = types_from_arrays((1.0, 15.0), (0.5, 0.5))
        assert is_feasible(contract, types)

    @pytest.mark.parametrize("shift", [0.05, 0.5, 3.0])
    def test_common_reward_shift_keeps_ic_and_relaxes_ir(self, shift: float) -> None:
        rng = np.random.default_rng(5)
        for _ in range(50):
            frequencies = rng.uniform(0.01, 1.0, size=3)
            rewards = rng.uniform(0.0, 1.0, size=3)
            types = types_from_arrays(
                tuple(np.sort(rng.uniform(1.0, 15.0, size=3))), (0.2, 0.3, 0.5)
            )
            contract = Contract.from_arrays(frequencies, rewards)
            shifted = Contract.from_arrays(frequencies, rewards + shift)

            assert check_ic(shifted, types) == check_ic(contract, types)
            before, after = check_ir(contract, types), check_ir(shifted, types)
            assert all(a or not b for a, b in zip(after, before, strict=True))

    def test_shape_mismatch(self) -> None:
        contract = Contract.from_arrays([0.2], [0.1])
        types = types_from_arrays((2.0, 12.0), (0.5, 0.5))
        with pytest.raises(ContractShapeError):
            check_ir(contract, types)
        assert is_feasible(contract, types) is False


class TestBsUtility:
    """Test cases for the base-station utility."""

    def test_matches_expected_profit(self) -> None:
        market = two_type_market()
        contract = Contract.from_arrays([0.5, 1.0], [0.25, 0.3])
        qod = [
            qod_score(1.0 / f, market.slot, market.caps, market.alpha)
            for f in (0.5, 1.0)
        ]
        expected = 40 * (0.84 * (100 * qod[0] - 0.25) + 0.16 * (100 * qod[1] - 0.3))
        assert bs_utility(contract, market) == pytest.approx(expected, rel=1e-12)

    @pytest.mark.parametrize("k", [0, 1])
    def test_linear_in_each_reward(self, k: int) -> None:
        """Test that raising r_k by delta lowers the utility by M * Q_k * delta."""
        market = two_type_market()
        rewards = np.array([0.25, 0.3])
        base = bs_utility(Contract.from_arrays([0.5, 1.0], rewards), market)
        rewards[k] += 0.1
        bumped = bs_utility(Contract.from_arrays([0.5, 1.0], rewards), market)
        slope = (bumped - base) / 0.1
        assert slope == pytest.approx(-40 * market.probabilities[k], rel=1e-9)

    def test_out_of_domain_frequency_raises(self) -> None:
        market = MarketConfig(
            device_count=1,
            unit_profit=1.0,
            alpha=1.0,
            slot=SlotConfig(cached_data_size_bits=1.0, transmission_rate=1.0),
            caps=FreshnessCaps(max_aoi=0.5, max_latency=0.5),
            types=[DeviceType(phi=2.0, probability=1.0)],
        )
        with pytest.raises(DomainError):
            bs_utility(Contract.from_arrays([0.1], [0.0]), market)

    def test_mean_device_utility(self) -> None:
        contract = Contract.from_arrays([0.2, 0.5], [0.1, 0.2])
        types = types_from_arrays((2.0, 12.0), (0.25, 0.75))
        expected = 0.25 * 0.0 + 0.75 * (0.2 - 0.5 / 12.0)
        assert mean_device_utility(contract, types) == pytest.approx(expected)
