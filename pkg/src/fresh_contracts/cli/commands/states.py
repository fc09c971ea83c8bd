"""The states verb: the policy's contracts for given network state vectors."""

from __future__ import annotations

import argparse
from pathlib import Path

from fresh_contracts.cli.utils.error_handling import EXIT_FAILURE, EXIT_OK
from fresh_contracts.cli.utils.run_context import RunContext
from fresh_contracts.config import AppConfig
from fresh_contracts.core.errors import ConfigError
from fresh_contracts.core.parsers.state_parser import StateParser
from fresh_contracts.core.services.evaluation_service import (
    EvaluationService,
    StateContractReport,
)


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "states",
        parents=parents,
        help="print the policy's contract for each state row",
    )
    parser.add_argument(
        "--states-file",
        type=Path,
        default=None,
        help="one state per line: M, K, A_max, D_max, Q_1..Q_K, phi_1..phi_K",
    )
    parser.set_defaults(handler=run)


def _format_report(report: StateContractReport) -> str:
    if report.error is not None:
        return f"state {report.state_id}: error: {report.error}"
    items = ", ".join(
        f"type {k}: f={item.update_frequency:.6f} r={item.reward:.6f}"
        for k, item in enumerate(report.contract.items, start=1)
    )
    utility = f"{report.bs_utility:.4f}" if report.bs_utility is not None else "n/a"
    return (
        f"state {report.state_id}: {items}; "
        f"feasible={report.feasible} bs_utility={utility}"
    )


def run(args: argparse.Namespace) -> int:
    context = RunContext.from_args(args)
    if args.states_file is not None:
        if not args.states_file.is_file():
            raise ConfigError(f"States file not found: {args.states_file}")
        lines = args.states_file.read_text().splitlines()
    else:
        lines = AppConfig.REFERENCE_STATES
    rows = StateParser().parse_lines(lines)
    params = context.load_policy(args)
    reports = EvaluationService(context.config, context.writer).report_states(
        params, rows
    )
    for report in reports:
        print(_format_report(report))
    return EXIT_FAILURE if any(r.error for r in reports) else EXIT_OK
