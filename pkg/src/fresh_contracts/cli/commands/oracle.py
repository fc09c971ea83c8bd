"""The oracle verb: exhaustive grid solve for one state."""

from __future__ import annotations

import argparse

import numpy as np

from fresh_contracts.cli.utils.error_handling import EXIT_OK
from fresh_contracts.cli.utils.run_context import RunContext
from fresh_contracts.core.learning.env import check_state, sample_state
from fresh_contracts.core.parsers.state_parser import StateParser
from fresh_contracts.core.services.evaluation_service import oracle_designer


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "oracle",
        parents=parents,
        help="solve the contract design problem by grid search",
    )
    parser.add_argument(
        "--state",
        default=None,
        help='state row "M, K, A_max, D_max, Q..., phi..." (default: sampled)',
    )
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    context = RunContext.from_args(args)
    env = context.config.env
    if args.state is not None:
        state = check_state(StateParser().parse_row(args.state), env)
    else:
        state = sample_state(env, np.random.default_rng(context.config.seeds[0]))

    result = oracle_designer(context.config, env).solve(state)
    print(f"state: {', '.join(f'{v:g}' for v in state.as_row())}")
    for k, item in enumerate(result.best_contract.items, start=1):
        print(f"type {k}: f={item.update_frequency!r} r={item.reward!r}")
    print(f"bs_utility: {result.best_utility!r}")
    print(f"feasible points: {result.feasible_count} of {result.evaluated_count}")
    return EXIT_OK
