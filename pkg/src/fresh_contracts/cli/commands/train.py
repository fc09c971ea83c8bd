"""The train verb: one PPO run per configured seed."""

from __future__ import annotations

import argparse

from fresh_contracts.cli.utils.error_handling import EXIT_OK
from fresh_contracts.cli.utils.run_context import RunContext
from fresh_contracts.core.services.training_service import TrainingService


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "train",
        parents=parents,
        help="train a contract design policy for every configured seed",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    context = RunContext.from_args(args)
    summaries = TrainingService(context.config, context.writer).run()
    for summary in summaries:
        print(
            f"seed {summary.seed}: {summary.episodes} episodes, "
            f"{summary.updates} updates, "
            f"final mean reward {summary.final_mean_reward:.4f}, "
            f"feasible {summary.final_feasibility_rate:.1%}, "
            f"log {summary.log_path}, checkpoint {summary.checkpoint_path}"
        )
    return EXIT_OK
