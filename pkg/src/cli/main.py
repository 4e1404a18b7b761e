"""Command-line entry point: ``python -m src.cli <synth|train|track|eval|compare> [flags]``."""
import argparse
import logging
import sys
from collections.abc import Sequence
from typing import NoReturn

from src.cli.commands import cmd_compare, cmd_eval, cmd_synth, cmd_track, cmd_train, describe_errors
from src.config.run_config import CostMode, EmbeddingMode, RunConfig, TokenMode, apply_overrides, load_run_config
from src.config.settings import settings
from src.experiments.ablation import STUDIES
from src.utils.error_handlers import CheckpointError, ConfigError, PipelineError, StageError, run_stage
from src.utils.id_generator import generate_run_id

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with ``EXIT_USAGE``."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> CliParser:
    common = CliParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration (defaults apply when omitted)")
    common.add_argument("--seed", type=int, help="Override the run seed (also seeds synthetic data)")
    common.add_argument("--no-tmp", action="store_true", help="Train a single joint phase instead of the phased schedule")
    common.add_argument("--mode", choices=[m.value for m in TokenMode], help="Token layout of the temporal window")
    common.add_argument("--embedding", choices=[m.value for m in EmbeddingMode], help="Token embedding mode")
    common.add_argument("--out", help="Output directory")
    common.add_argument("--data", help="Dataset directory in MOT17 layout")

    parser = CliParser(prog="onetrack", description="Desk-scale transformer multi-object tracking pipeline")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("synth", parents=[common], help="Generate synthetic sequences into the data directory")
    sub.add_parser("train", parents=[common], help="Train a model on the data directory")

    track = sub.add_parser("track", parents=[common], help="Track sequences with a trained model")
    track.add_argument("--checkpoint", help="Model checkpoint (default: <out>/model.otmw)")
    track.add_argument("--sequence", help="Track only this sequence")
    track.add_argument("--cost", choices=[m.value for m in CostMode], help="Association cost")

    evaluate = sub.add_parser("eval", parents=[common], help="Score tracker results against ground truth")
    evaluate.add_argument("--results", help="Directory of <seq>.txt result files (default: <out>/results)")

    compare = sub.add_parser("compare", parents=[common], help="Train and score the variants of an ablation study")
    compare.add_argument("--study", required=True, choices=list(STUDIES))
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Load the config file and apply flag overrides; raises ``ConfigError``."""
    config = apply_overrides(
        load_run_config(args.config),
        seed=args.seed,
        no_tmp=args.no_tmp,
        mode=args.mode,
        embedding=args.embedding,
        out=args.out,
        data_dir=args.data,
        checkpoint=getattr(args, "checkpoint", None),
    )
    cost = getattr(args, "cost", None)
    if cost is not None:
        config = config.model_copy(update={"assoc": config.assoc.model_copy(update={"cost_mode": CostMode(cost)})})
    return config


def dispatch(args: argparse.Namespace, config: RunConfig, run_id: str) -> None:
    if args.command == "synth":
        run_stage("synth", cmd_synth, run_id, config, run_id)
    elif args.command == "train":
        run_stage("train", cmd_train, run_id, config, run_id)
    elif args.command == "track":
        run_stage("track", cmd_track, run_id, config, run_id, args.sequence)
    elif args.command == "eval":
        run_stage("eval", cmd_eval, run_id, config, run_id, args.results)
    elif args.command == "compare":
        run_stage("compare", cmd_compare, run_id, config, run_id, args.study)


def _report(error: PipelineError) -> None:
    print(f"error: {error.message}", file=sys.stderr)
    for line in describe_errors(error.details):
        print(line, file=sys.stderr)


def main(argv: Sequence[str] | None = None) -> int:
    """Run one subcommand; returns the process exit code."""
    logging.basicConfig(level=settings.log_level, format=settings.log_format)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE

    run_id = generate_run_id()
    try:
        config = resolve_config(args)
        logger.info(f"Starting {args.command} run {run_id}")
        dispatch(args, config, run_id)
    except (ConfigError, CheckpointError) as e:
        _report(e)
        return EXIT_USAGE
    except StageError as e:
        print(f"error: {e.original_error}", file=sys.stderr)
        return EXIT_RUNTIME
    except PipelineError as e:
        _report(e)
        return EXIT_RUNTIME
    logger.info(f"Run {run_id} complete")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
