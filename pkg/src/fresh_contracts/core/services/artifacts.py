"""CSV and configuration artifacts written into the run's output directory."""

from __future__ import annotations

import logging
from collections.abc import Sequence
from pathlib import Path

import pandas as pd
from pydantic import BaseModel

from fresh_contracts.config import AppConfig, ExperimentConfig, dump_config
from fresh_contracts.core.learning.ppo import EpisodeLog

logger = logging.getLogger(__name__)


class ArtifactWriter:
    """Writes plot-ready CSVs with header rows and full float precision."""

    def __init__(self, output_dir: Path) -> None:
        self.output_dir = Path(output_dir)

    def path(self, filename: str) -> Path:
        return self.output_dir / filename

    def training_log_path(self, seed: int) -> Path:
        return self.path(AppConfig.TRAINING_LOG_TEMPLATE.format(seed=seed))

    def test_rewards_path(self, seed: int) -> Path:
        return self.path(AppConfig.TEST_REWARDS_TEMPLATE.format(seed=seed))

    def checkpoint_path(self, seed: int) -> Path:
        return self.path(AppConfig.CHECKPOINT_TEMPLATE.format(seed=seed))

    def write_frame(self, frame: pd.DataFrame, filename: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.path(filename)
        frame.to_csv(path, index=False)
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    def write_training_log(self, logs: list[EpisodeLog], seed: int) -> Path:
        frame = pd.DataFrame(
            [log.model_dump() for log in logs], columns=AppConfig.TRAINING_LOG_COLUMNS
        )
        return self.write_frame(frame, self.training_log_path(seed).name)

    def write_test_rewards(self, rows: Sequence[BaseModel], seed: int) -> Path:
        frame = pd.DataFrame(
            [row.model_dump() for row in rows], columns=AppConfig.TEST_REWARDS_COLUMNS
        )
        return self.write_frame(frame, self.test_rewards_path(seed).name)

    def write_config(self, config: ExperimentConfig) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        path = self.path(AppConfig.EFFECTIVE_CONFIG_FILE)
        path.write_text(dump_config(config))
        logger.debug(f"Wrote effective configuration to {path}")
        return path
