"""Side-by-side studies: each variant is trained, tracked and scored on the same seed and data."""
import logging
from collections.abc import Callable, Sequence

from src.config.run_config import EmbeddingMode, RunConfig, validate_run_config
from src.experiments.runner import evaluate_results, track_all, train_model
from src.models.annotations import SequenceData
from src.models.reports import ComparisonReport
from src.network.presets import BACKBONE_PRESETS, apply_preset
from src.utils.error_handlers import ConfigError, log_event

logger = logging.getLogger(__name__)

DEFAULT_WINDOWS = (1, 2, 5, 10)
STUDIES = ("tmp", "embedding", "window", "backbone")


def _with(config: RunConfig, section: str, **values: object) -> RunConfig:
    data = config.model_dump(mode="json")
    target = data
    for key in section.split("."):
        target = target[key]
    target.update(values)
    return validate_run_config(data)


def study_variants(config: RunConfig, study: str, windows: Sequence[int] = DEFAULT_WINDOWS) -> dict[str, RunConfig]:
    """Named configurations compared by ``study``; all share the base seed."""
    if study == "tmp":
        return {
            "tmp": _with(config, "schedule", use_tmp=True),
            "joint": _with(config, "schedule", use_tmp=False),
        }
    if study == "embedding":
        return {mode.value: _with(config, "model.pipeline", embedding_mode=mode.value) for mode in EmbeddingMode}
    if study == "window":
        return {f"W={w}": _with(config, "model.pipeline", window=w) for w in windows}
    if study == "backbone":
        variants = {}
        for name in BACKBONE_PRESETS:
            data = config.model_dump(mode="json")
            data["model"] = apply_preset(config.model, name).model_dump(mode="json")
            variants[name] = validate_run_config(data)
        return variants
    raise ConfigError(f"unknown study '{study}'", {"studies": list(STUDIES)})


def run_study(
    config: RunConfig,
    study: str,
    sequences: Sequence[SequenceData],
    run_id: str = "",
    progress: Callable[[str], None] | None = None,
) -> ComparisonReport:
    """Train, track and evaluate every variant of ``study`` on ``sequences``.

    Args:
        config: Base run configuration
        study: One of tmp, embedding, window, backbone
        sequences: Training sequences; tracking and scoring use the same set
        run_id: Correlation id for logged events
        progress: Optional callback receiving each variant name before it runs

    Returns:
        ComparisonReport with one aggregate EvalReport and final loss per variant
    """
    variants = study_variants(config, study)
    report = ComparisonReport(study=study, seed=config.seed)
    for name, variant in variants.items():
        if progress is not None:
            progress(name)
        model, train_report = train_model(variant, sequences, run_id=run_id)
        outcome = evaluate_results(sequences, track_all(variant, model, sequences), config.eval_iou)
        report.variants[name] = outcome.aggregate
        report.final_losses[name] = train_report.final_loss
        log_event(
            "variant_complete",
            run_id or None,
            study=study,
            variant=name,
            hota=outcome.aggregate.hota,
            mota=outcome.aggregate.mota,
            final_loss=train_report.final_loss,
        )
    logger.info(f"Study {study} compared {len(report.variants)} variants")
    return report


def format_comparison(report: ComparisonReport) -> str:
    """Fixed-width table of headline metrics per variant."""
    columns = ("variant", "hota", "mota", "idf1", "ids", "fps", "ms/frame", "final_loss")
    rows = [list(columns)]
    for name, ev in report.variants.items():
        per_frame = 1000.0 * ev.elapsed / ev.num_frames if ev.elapsed is not None and ev.num_frames else None
        loss = report.final_losses.get(name)
        rows.append([
            name,
            f"{ev.hota:.4f}",
            "n/a" if ev.mota is None else f"{ev.mota:.4f}",
            f"{ev.idf1:.4f}",
            str(ev.ids),
            "n/a" if ev.fps is None else f"{ev.fps:.2f}",
            "n/a" if per_frame is None else f"{per_frame:.2f}",
            "n/a" if loss is None else f"{loss:.6f}",
        ])
    widths = [max(len(row[i]) for row in rows) for i in range(len(columns))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths, strict=True)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"
