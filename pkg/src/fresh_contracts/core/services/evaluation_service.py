"""Evaluation of trained policies against the baselines, per state and across alpha."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Literal

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from fresh_contracts.config import AppConfig, ExperimentConfig
from fresh_contracts.core.design.baselines import (
    OracleReplayDesigner,
    RandomContractDesigner,
)
from fresh_contracts.core.design.oracle import OracleResult
from fresh_contracts.core.design.policy import PolicyContractDesigner
from fresh_contracts.core.learning.checkpoint import save_checkpoint
from fresh_contracts.core.learning.env import (
    EnvConfig,
    NetworkState,
    evaluate_contract,
    mirror_caps,
)
from fresh_contracts.core.learning.network import PolicyParams
from fresh_contracts.core.learning.ppo import evaluate_states, sample_states
from fresh_contracts.core.market.contract import device_utility, mean_device_utility
from fresh_contracts.core.market.models import Contract
from fresh_contracts.core.parsers.state_parser import ParsedRow
from fresh_contracts.core.services.artifacts import ArtifactWriter
from fresh_contracts.core.services.training_service import TrainingService

logger = logging.getLogger(__name__)


class ComparisonRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    state_id: int
    ppo_reward: float
    random_reward: float
    oracle_reward: float
    ppo_feasible: bool


class ComparisonSummary(BaseModel):
    """Per-state rewards of the three designers and their means."""

    model_config = ConfigDict(frozen=True)

    rows: tuple[ComparisonRow, ...]
    csv_path: Path | None = None

    def _mean(self, column: str) -> float:
        if not self.rows:
            return float("nan")
        return float(np.mean([getattr(row, column) for row in self.rows]))

    @property
    def mean_ppo(self) -> float:
        return self._mean("ppo_reward")

    @property
    def mean_random(self) -> float:
        return self._mean("random_reward")

    @property
    def mean_oracle(self) -> float:
        return self._mean("oracle_reward")

    @property
    def ppo_feasibility_rate(self) -> float:
        return self._mean("ppo_feasible")

    @property
    def oracle_ratio(self) -> float:
        """Mean policy reward as a share of the mean oracle utility."""
        oracle = self.mean_oracle
        return self.mean_ppo / oracle if oracle else float("nan")


class StateContractReport(BaseModel):
    """The policy's contract for one user-supplied state, or why there is none."""

    model_config = ConfigDict(frozen=True)

    state_id: int
    state: NetworkState | None = None
    contract: Contract | None = None
    feasible: bool = False
    bs_utility: float | None = None
    device_utilities: tuple[float, ...] = ()
    error: str | None = None


class SweepPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    alpha: float
    bs_utility_mean: float
    device_utility_mean: float


def oracle_designer(config: ExperimentConfig, env: EnvConfig) -> OracleReplayDesigner:
    """Refined grid oracle with the configured resolution, for ``env``."""
    return OracleReplayDesigner(
        env,
        config.oracle.grid(env),
        refine_rounds=config.oracle.refine_rounds,
        max_evaluations=config.oracle.max_evaluations,
        shrink=config.oracle.shrink,
    )


class EvaluationService:
    """Service for the compare, states and alpha-sweep experiments."""

    def __init__(self, config: ExperimentConfig, writer: ArtifactWriter) -> None:
        self._config = config
        self._writer = writer

    def evaluation_states(self) -> list[NetworkState]:
        evaluation = self._config.evaluation
        return sample_states(self._config.env, evaluation.n_states, evaluation.seed)

    def solve_oracle(
        self,
        states: list[NetworkState],
        env: EnvConfig | None = None,
        workers: int = 1,
    ) -> list[OracleResult]:
        """Oracle result per state, in state order."""
        designer = oracle_designer(self._config, env or self._config.env)
        if workers > 1 and len(states) > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(designer.solve, states))
        return [designer.solve(state) for state in states]

    def compare(
        self, params: PolicyParams, workers: int | None = None
    ) -> ComparisonSummary:
        """Policy, random baseline and oracle replay on the shared state set."""
        env = self._config.env
        states = self.evaluation_states()
        oracle = self.solve_oracle(
            states, workers=workers or self._config.evaluation.workers
        )
        policy = PolicyContractDesigner(params, env)
        random_designer = RandomContractDesigner(
            env, np.random.default_rng([self._config.evaluation.seed, 1])
        )
        rows = []
        for state_id, (state, result) in enumerate(zip(states, oracle)):
            ppo_reward, ppo_feasible = evaluate_contract(
                state, policy.design(state), env
            )
            random_reward, _ = evaluate_contract(
                state, random_designer.design(state), env
            )
            rows.append(
                ComparisonRow(
                    state_id=state_id,
                    ppo_reward=ppo_reward,
                    random_reward=random_reward,
                    oracle_reward=result.best_utility,
                    ppo_feasible=ppo_feasible,
                )
            )

        frame = pd.DataFrame(
            [row.model_dump() for row in rows], columns=AppConfig.COMPARISON_COLUMNS
        )
        csv_path = self._writer.write_frame(frame, AppConfig.COMPARISON_FILE)
        summary = ComparisonSummary(rows=tuple(rows), csv_path=csv_path)
        if rows:
            logger.info(
                f"Mean rewards over {len(rows)} states: ppo {summary.mean_ppo:.3f}, "
                f"random {summary.mean_random:.3f}, oracle {summary.mean_oracle:.3f}"
            )
        return summary

    def report_states(
        self, params: PolicyParams, rows: list[ParsedRow]
    ) -> list[StateContractReport]:
        """Decode the policy's contract for every parsed row; bad rows keep errors."""
        env = self._config.env
        policy = PolicyContractDesigner(params, env)
        reports = []
        for state_id, row in enumerate(rows, start=1):
            if not row.ok:
                reports.append(StateContractReport(state_id=state_id, error=row.error))
                continue
            state = row.state
            try:
                contract = policy.design(state)
            except ValueError as e:
                logger.warning(f"Skipping state {state_id}: {e}")
                reports.append(StateContractReport(state_id=state_id, error=str(e)))
                continue
            reward, feasible = evaluate_contract(state, contract, env)
            reports.append(
                StateContractReport(
                    state_id=state_id,
                    state=state,
                    contract=contract,
                    feasible=feasible,
                    bs_utility=reward if feasible else None,
                    device_utilities=tuple(
                        device_utility(item, dtype)
                        for item, dtype in zip(contract.items, state.types)
                    ),
                )
            )
        self._write_state_reports(reports)
        return reports

    def _write_state_reports(self, reports: list[StateContractReport]) -> Path:
        records = []
        for report in reports:
            if report.contract is None:
                continue
            for k, (item, dtype, utility) in enumerate(
                zip(report.contract.items, report.state.types, report.device_utilities),
                start=1,
            ):
                records.append(
                    {
                        "state_id": report.state_id,
                        "k": k,
                        "phi": dtype.phi,
                        "q": dtype.probability,
                        "f": item.update_frequency,
                        "r": item.reward,
                        "device_utility": utility,
                        "feasible": report.feasible,
                        "bs_utility": report.bs_utility,
                    }
                )
        frame = pd.DataFrame(records, columns=AppConfig.STATES_COLUMNS)
        return self._writer.write_frame(frame, AppConfig.STATES_FILE)

    def sweep_states(self) -> list[NetworkState]:
        """Sweep evaluation set; each state is followed by its cap-mirrored twin."""
        sweep = self._config.sweep
        states = sample_states(self._config.env, sweep.n_states, sweep.seed)
        if not sweep.antithetic:
            return states
        return [twin for state in states for twin in (state, mirror_caps(state))]

    def alpha_sweep(
        self,
        alphas: list[float],
        mode: Literal["oracle", "train"] = "oracle",
        checkpoint_dir: Path | None = None,
        workers: int = 1,
    ) -> list[SweepPoint]:
        """BS and mean device utility across alpha, solved or trained per alpha."""
        if not alphas:
            raise ValueError("The alpha sweep needs at least one alpha")
        states = self.sweep_states()
        points = []
        for alpha in alphas:
            env = self._config.env.model_copy(update={"alpha": float(alpha)})
            if mode == "oracle":
                point = self._oracle_point(alpha, env, states, workers)
            else:
                point = self._trained_point(alpha, env, states, checkpoint_dir)
            logger.info(
                f"alpha={alpha:.2f}: BS utility {point.bs_utility_mean:.3f}, "
                f"device utility {point.device_utility_mean:.5f}"
            )
            points.append(point)

        frame = pd.DataFrame(
            [point.model_dump() for point in points],
            columns=AppConfig.ALPHA_SWEEP_COLUMNS,
        )
        self._writer.write_frame(frame, AppConfig.ALPHA_SWEEP_FILE)
        return points

    def _oracle_point(
        self,
        alpha: float,
        env: EnvConfig,
        states: list[NetworkState],
        workers: int,
    ) -> SweepPoint:
        results = self.solve_oracle(states, env=env, workers=workers)
        return SweepPoint(
            alpha=alpha,
            bs_utility_mean=float(np.mean([r.best_utility for r in results])),
            device_utility_mean=float(
                np.mean(
                    [
                        mean_device_utility(r.best_contract, state.types)
                        for r, state in zip(results, states)
                    ]
                )
            ),
        )

    def _trained_point(
        self,
        alpha: float,
        env: EnvConfig,
        states: list[NetworkState],
        checkpoint_dir: Path | None,
    ) -> SweepPoint:
        config = self._config.model_copy(update={"env": env})
        seed = config.seeds[0]
        result = TrainingService(config, self._writer).train_policy(seed)
        if checkpoint_dir is not None:
            save_checkpoint(
                Path(checkpoint_dir) / f"policy_alpha{alpha:.2f}_seed{seed}.fqck",
                result.params,
                result.adam,
            )
        report = evaluate_states(result.params, env, states)
        device = [
            mean_device_utility(contract, state.types)
            for contract, state, ok in zip(report.contracts, states, report.feasible)
            if ok
        ]
        if not device:
            logger.warning(f"No feasible contracts at alpha={alpha:.2f}")
        return SweepPoint(
            alpha=alpha,
            bs_utility_mean=report.mean_reward,
            device_utility_mean=float(np.mean(device)) if device else float("nan"),
        )
