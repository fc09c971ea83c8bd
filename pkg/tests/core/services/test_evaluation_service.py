"""Tests for the evaluation service."""

from __future__ import annotations

import math
from pathlib import Path
from typing import TYPE_CHECKING

import pandas as pd
import pytest

from fresh_contracts.config import AppConfig, ExperimentConfig
from fresh_contracts.core.design.baselines import OracleReplayDesigner
from fresh_contracts.core.design.policy import PolicyContractDesigner
from fresh_contracts.core.learning.env import evaluate_contract
from fresh_contracts.core.learning.network import PolicyParams, init_policy_params
from fresh_contracts.core.market.contract import is_feasible
from fresh_contracts.core.parsers.state_parser import StateParser
from fresh_contracts.core.services.artifacts import ArtifactWriter
from fresh_contracts.core.services.evaluation_service import (
    ComparisonRow,
    ComparisonSummary,
    EvaluationService,
    oracle_designer,
)

if TYPE_CHECKING:
    from pytest_mock.plugin import MockerFixture


@pytest.fixture
def params(tiny_config: ExperimentConfig) -> PolicyParams:
    env = tiny_config.env
    return init_policy_params(
        tiny_config.nn.actor_spec(env), tiny_config.nn.critic_spec(env)
    )


@pytest.fixture
def service(tmp_path: Path, tiny_config: ExperimentConfig) -> EvaluationService:
    return EvaluationService(tiny_config, ArtifactWriter(tmp_path))


class TestCompare:
    """Test cases for the three-way comparison."""

    def test_rows_and_csv(
        self, service: EvaluationService, params: PolicyParams, tmp_path: Path
    ) -> None:
        summary = service.compare(params)

        assert [row.state_id for row in summary.rows] == [0, 1, 2, 3]
        frame = pd.read_csv(tmp_path / AppConfig.COMPARISON_FILE)
        assert list(frame.columns) == AppConfig.COMPARISON_COLUMNS
        assert len(frame) == 4
        assert summary.csv_path == tmp_path / AppConfig.COMPARISON_FILE
        assert all(row.oracle_reward > -500.0 for row in summary.rows)

    def test_repeatable(
        self, service: EvaluationService, params: PolicyParams
    ) -> None:
        assert service.compare(params).rows == service.compare(params).rows

    def test_policy_column_comes_from_the_policy_designer(
        self,
        service: EvaluationService,
        params: PolicyParams,
        tiny_config: ExperimentConfig,
        mocker: MockerFixture,
    ) -> None:
        spy = mocker.spy(PolicyContractDesigner, "design")

        summary = service.compare(params)

        assert spy.call_count == 4
        designer = PolicyContractDesigner(params, tiny_config.env)
        for state, row in zip(service.evaluation_states(), summary.rows):
            reward, feasible = evaluate_contract(
                state, designer.design(state), tiny_config.env
            )
            assert row.ppo_reward == reward
            assert row.ppo_feasible is feasible

    def test_oracle_column_comes_from_the_oracle_designer(
        self, service: EvaluationService, params: PolicyParams, mocker: MockerFixture
    ) -> None:
        spy = mocker.spy(OracleReplayDesigner, "solve")
        summary = service.compare(params, workers=1)
        assert spy.call_count == 4
        solved = service.solve_oracle(service.evaluation_states())
        assert [row.oracle_reward for row in summary.rows] == [
            result.best_utility for result in solved
        ]

    def test_oracle_contracts_are_feasible(
        self, service: EvaluationService
    ) -> None:
        states = service.evaluation_states()
        for state, result in zip(states, service.solve_oracle(states)):
            assert is_feasible(result.best_contract, state.types)

    def test_worker_pool_matches_serial(self, service: EvaluationService) -> None:
        states = service.evaluation_states()[:2]
        serial = service.solve_oracle(states, workers=1)
        pooled = service.solve_oracle(states, workers=2)
        assert [r.best_utility for r in pooled] == [r.best_utility for r in serial]

    def test_summary_means(self) -> None:
        rows = (
            ComparisonRow(
                state_id=0,
                ppo_reward=90.0,
                random_reward=-500.0,
                oracle_reward=100.0,
                ppo_feasible=True,
            ),
            ComparisonRow(
                state_id=1,
                ppo_reward=70.0,
                random_reward=20.0,
                oracle_reward=100.0,
                ppo_feasible=False,
            ),
        )
        summary = ComparisonSummary(rows=rows)
        assert summary.mean_ppo == 80.0
        assert summary.mean_random == -240.0
        assert summary.ppo_feasibility_rate == 0.5
        assert summary.oracle_ratio == pytest.approx(0.8)
        assert math.isnan(ComparisonSummary(rows=()).mean_ppo)


class TestOracleDesigner:
    def test_uses_configured_resolution(self, tiny_config: ExperimentConfig) -> None:
        designer = oracle_designer(tiny_config, tiny_config.env)
        assert isinstance(designer, OracleReplayDesigner)
        assert len(designer.grid.f_grid) == tiny_config.oracle.points
        assert designer.refine_rounds == tiny_config.oracle.refine_rounds
        assert designer.shrink == tiny_config.oracle.shrink
        assert designer.max_evaluations == tiny_config.oracle.max_evaluations


class TestReportStates:
    """Test cases for per-state contract reports."""

    def test_bad_rows_keep_their_errors(
        self, service: EvaluationService, params: PolicyParams, tmp_path: Path
    ) -> None:
        rows = StateParser().parse_lines(
            [
                "40, 2, 0.95, 0.73, 0.84, 0.16, 2, 12",
                "40, 2, oops",
                "40, 1, 0.9, 0.8, 1.0, 5.0",
                "40, 2, 0.95, 0.81, 0.43, 0.57, 2, 13",
            ]
        )

        reports = service.report_states(params, rows)

        assert [r.state_id for r in reports] == [1, 2, 3, 4]
        assert [r.error is None for r in reports] == [True, False, False, True]
        assert "K=1" in reports[2].error
        frame = pd.read_csv(tmp_path / AppConfig.STATES_FILE)
        assert list(frame.columns) == AppConfig.STATES_COLUMNS
        assert frame["state_id"].tolist() == [1, 1, 4, 4]
        assert frame["k"].tolist() == [1, 2, 1, 2]

    def test_device_utilities_follow_the_contract(
        self, service: EvaluationService, params: PolicyParams
    ) -> None:
        rows = StateParser().parse_lines(AppConfig.REFERENCE_STATES)
        for report in service.report_states(params, rows):
            for item, dtype, utility in zip(
                report.contract.items, report.state.types, report.device_utilities
            ):
                assert utility == pytest.approx(
                    item.reward - item.update_frequency / dtype.phi
                )
            if not report.feasible:
                assert report.bs_utility is None


class TestAlphaSweep:
    """Test cases for the alpha sweep."""

    def test_sweep_states_are_mirrored_pairs(
        self, service: EvaluationService
    ) -> None:
        states = service.sweep_states()
        assert len(states) == 4
        for state, twin in zip(states[::2], states[1::2]):
            assert (twin.max_aoi, twin.max_latency) == (
                state.max_latency,
                state.max_aoi,
            )

    def test_oracle_mode(self, service: EvaluationService, tmp_path: Path) -> None:
        points = service.alpha_sweep([0.25, 0.5, 0.75])

        assert [p.alpha for p in points] == [0.25, 0.5, 0.75]
        frame = pd.read_csv(tmp_path / AppConfig.ALPHA_SWEEP_FILE)
        assert list(frame.columns) == AppConfig.ALPHA_SWEEP_COLUMNS
        assert len(frame) == 3
        assert all(p.device_utility_mean >= -1e-12 for p in points)

    def test_oracle_mode_solves_at_each_alpha(
        self, service: EvaluationService, mocker: MockerFixture
    ) -> None:
        spy = mocker.spy(service, "solve_oracle")
        service.alpha_sweep([0.2, 0.8])
        alphas = [call.kwargs["env"].alpha for call in spy.call_args_list]
        assert alphas == [0.2, 0.8]

    def test_train_mode_saves_one_checkpoint_per_alpha(
        self, service: EvaluationService, tmp_path: Path
    ) -> None:
        checkpoints = tmp_path / "checkpoints"
        points = service.alpha_sweep(
            [0.25, 0.75], mode="train", checkpoint_dir=checkpoints
        )
        assert len(points) == 2
        assert (checkpoints / "policy_alpha0.25_seed312.fqck").is_file()
        assert (checkpoints / "policy_alpha0.75_seed312.fqck").is_file()

    def test_empty_alpha_list(self, service: EvaluationService) -> None:
        with pytest.raises(ValueError, match="at least one alpha"):
            service.alpha_sweep([])
