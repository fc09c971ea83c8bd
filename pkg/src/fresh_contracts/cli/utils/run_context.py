"""Configuration, output directory and checkpoint lookup shared by the verbs."""

from __future__ import annotations

import argparse
import logging
from dataclasses import dataclass
from pathlib import Path

from fresh_contracts.config import ExperimentConfig, load_config, resolve_output_dir
from fresh_contracts.core.errors import CheckpointError
from fresh_contracts.core.learning.checkpoint import load_checkpoint
from fresh_contracts.core.learning.network import PolicyParams
from fresh_contracts.core.services.artifacts import ArtifactWriter

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunContext:
    config: ExperimentConfig
    writer: ArtifactWriter

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunContext:
        config = load_config(args.config).with_seed(args.seed)
        output_dir = resolve_output_dir(config, args.out)
        logger.debug(f"Writing artifacts to {output_dir}")
        return cls(config=config, writer=ArtifactWriter(output_dir))

    def checkpoint_path(self, args: argparse.Namespace) -> Path:
        """``--checkpoint``, else the first seed's checkpoint in the output dir."""
        if args.checkpoint is not None:
            return Path(args.checkpoint)
        return self.writer.checkpoint_path(self.config.seeds[0])

    def load_policy(self, args: argparse.Namespace) -> PolicyParams:
        params, _ = load_checkpoint(self.checkpoint_path(args))
        env = self.config.env
        if (
            params.action_dim != env.action_dim
            or params.actor_spec.input_dim != env.feature_dim
        ):
            raise CheckpointError(
                f"Checkpoint was trained for K={params.action_dim // 2} types but "
                f"the configuration has K={env.type_count}"
            )
        return params
