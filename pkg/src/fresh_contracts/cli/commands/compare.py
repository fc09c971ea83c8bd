"""The compare verb: trained policy vs random baseline vs oracle replay."""

from __future__ import annotations

import argparse

from fresh_contracts.cli.utils.error_handling import EXIT_OK
from fresh_contracts.cli.utils.run_context import RunContext
from fresh_contracts.core.services.evaluation_service import EvaluationService


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "compare",
        parents=parents,
        help="evaluate a checkpoint against the random and oracle designers",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=None,
        help="processes for the per-state oracle solves",
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    context = RunContext.from_args(args)
    params = context.load_policy(args)
    summary = EvaluationService(context.config, context.writer).compare(
        params, workers=args.workers
    )
    print(
        f"{len(summary.rows)} states: mean reward ppo {summary.mean_ppo:.4f}, "
        f"random {summary.mean_random:.4f}, oracle {summary.mean_oracle:.4f}; "
        f"ppo feasible {summary.ppo_feasibility_rate:.1%}, "
        f"oracle ratio {summary.oracle_ratio:.3f}"
    )
    print(f"comparison written to {summary.csv_path}")
    return EXIT_OK
