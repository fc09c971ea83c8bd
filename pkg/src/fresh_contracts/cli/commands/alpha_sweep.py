"""The alpha-sweep verb: BS and device utility across the AoI weight."""

from __future__ import annotations

import argparse
from pathlib import Path

from fresh_contracts.cli.utils.error_handling import EXIT_OK
from fresh_contracts.cli.utils.run_context import RunContext
from fresh_contracts.core.services.evaluation_service import EvaluationService
from fresh_contracts.core.services.shape_checks import is_unimodal, relative_range


def parse_alphas(text: str) -> list[float]:
    """Comma-separated alpha values; blanks are ignored."""
    try:
        return [float(token) for token in text.split(",") if token.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"invalid alpha list {text!r}") from e


def register(subparsers, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser(
        "alpha-sweep",
        parents=parents,
        help="sweep alpha and record mean BS and device utility",
    )
    parser.add_argument(
        "--mode",
        choices=["oracle", "train"],
        default=None,
        help="solve each alpha with the oracle or train a fresh policy",
    )
    parser.add_argument(
        "--alphas",
        type=parse_alphas,
        default=None,
        help="comma-separated alphas (default: the configured grid)",
    )
    parser.add_argument(
        "--checkpoint-dir",
        type=Path,
        default=None,
        help="where train mode stores one checkpoint per alpha",
    )
    parser.add_argument("--workers", type=int, default=1)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    context = RunContext.from_args(args)
    sweep = context.config.sweep
    alphas = args.alphas if args.alphas is not None else sweep.alpha_grid()
    mode = args.mode or sweep.mode
    checkpoint_dir = args.checkpoint_dir or context.writer.output_dir
    points = EvaluationService(context.config, context.writer).alpha_sweep(
        alphas, mode=mode, checkpoint_dir=checkpoint_dir, workers=args.workers
    )

    for point in points:
        print(
            f"alpha={point.alpha:.2f} bs_utility_mean={point.bs_utility_mean:.6f} "
            f"device_utility_mean={point.device_utility_mean:.6f}"
        )
    bs = [point.bs_utility_mean for point in points]
    devices = [point.device_utility_mean for point in points]
    if len(points) >= 3:
        print(f"bs utility unimodal: {is_unimodal(bs)}")
        try:
            bs_spread, device_spread = relative_range(bs), relative_range(devices)
        except ValueError as e:
            print(f"relative range: unavailable ({e})")
        else:
            print(
                f"relative range: bs_utility {bs_spread:.6f}, device_utility "
                f"{device_spread:.6f} (device more stable: {device_spread < bs_spread})"
            )
    return EXIT_OK
