"""Train, track and evaluate one configuration end to end."""
import logging
from collections.abc import Sequence
from dataclasses import dataclass

from src.config.run_config import RunConfig
from src.evaluation.metrics import aggregate_reports, evaluate_sequence
from src.models.annotations import SequenceData
from src.models.reports import EvalReport, TrainReport
from src.network.model import OneTrackNet
from src.storage.interface import StorageInterface
from src.tracking.pipeline import SequenceResult, TrackingPipeline, track_sequences
from src.training.dataset import build_samples
from src.training.trainer import train_tmp

logger = logging.getLogger(__name__)


@dataclass
class EvaluationOutcome:
    reports: list[EvalReport]
    aggregate: EvalReport


def train_model(
    config: RunConfig,
    sequences: Sequence[SequenceData],
    storage: StorageInterface | None = None,
    checkpoint_prefix: str = "checkpoints",
    run_id: str = "",
) -> tuple[OneTrackNet, TrainReport]:
    """Build a fresh network from ``config.seed`` and run the training schedule on ``sequences``."""
    samples = build_samples(sequences, config.model, config.loss, config.displacement)
    model = OneTrackNet(config.model, seed=config.seed)
    report = train_tmp(
        model,
        samples,
        config.schedule,
        config.loss,
        seed=config.seed,
        storage=storage,
        checkpoint_prefix=checkpoint_prefix,
        run_id=run_id,
    )
    return model, report


def track_all(config: RunConfig, model: OneTrackNet, sequences: Sequence[SequenceData]) -> list[SequenceResult]:
    pipeline = TrackingPipeline(model, config.model.pipeline.window, config.assoc, config.displacement)
    return track_sequences(pipeline, sequences, config.workers)


def evaluate_results(
    sequences: Sequence[SequenceData],
    results: Sequence[SequenceResult],
    iou_min: float = 0.5,
) -> EvaluationOutcome:
    """Score tracker results against each sequence's ground truth, matched by sequence name."""
    by_name = {r.name: r for r in results}
    reports = []
    for seq in sorted(sequences, key=lambda s: s.name):
        result = by_name.get(seq.name)
        if result is None:
            logger.warning(f"No tracker results for {seq.name}; scoring it as empty")
            predictions = {}
            elapsed = None
        else:
            predictions = {f.frame: f for f in result.frames}
            elapsed = result.elapsed
        reports.append(evaluate_sequence(seq.annotations, predictions, seq.name, iou_min, elapsed))
    return EvaluationOutcome(reports, aggregate_reports(reports))
