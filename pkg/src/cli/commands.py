"""Subcommand implementations. Each takes a validated ``RunConfig`` and a run id."""
import logging
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any

from src.config.run_config import RunConfig
from src.dataio.mot_format import parse_mot, write_results
from src.dataio.synth import list_sequences, read_ground_truth, read_sequence, synth_generate, write_sequence
from src.evaluation.metrics import aggregate_reports, evaluate_sequence
from src.evaluation.report import format_table, write_reports
from src.experiments.ablation import format_comparison, run_study
from src.experiments.runner import track_all, train_model
from src.models.annotations import AnnotationRole, SequenceData
from src.models.reports import ComparisonReport, EvalReport, TrainReport
from src.network.model import OneTrackNet
from src.storage.local_storage import LocalStorage
from src.tracking.pipeline import SequenceResult
from src.utils.error_handlers import ConfigError, log_event
from src.utils.validators import validate_checkpoint_file, validate_data_dir, validate_output_dir

logger = logging.getLogger(__name__)

MODEL_KEY = "model.otmw"
RESULTS_PREFIX = "results"
REPORTS_PREFIX = "reports"
TRACKING_SUMMARY_KEY = "tracking_summary.json"


def _output_storage(path: str) -> LocalStorage:
    valid, message = validate_output_dir(path)
    if not valid:
        raise ConfigError(message, {"path": path})
    return LocalStorage(path)


def _sequence_dirs(config: RunConfig, only: str | None = None) -> list[Path]:
    valid, message = validate_data_dir(config.paths.data_dir)
    if not valid:
        raise ConfigError(message, {"path": config.paths.data_dir})
    dirs = list_sequences(config.paths.data_dir)
    if only is not None:
        dirs = [d for d in dirs if d.name == only]
        if not dirs:
            raise ConfigError(f"Sequence '{only}' not found in {config.paths.data_dir}")
    return dirs


def load_sequences(config: RunConfig, only: str | None = None) -> list[SequenceData]:
    """Decode every sequence under ``paths.data_dir`` at the model's input size."""
    dirs = _sequence_dirs(config, only)
    size = config.model.pipeline.image_size
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        sequences = list(pool.map(lambda d: read_sequence(d, size), dirs))
    logger.info(f"Loaded {len(sequences)} sequence(s) from {config.paths.data_dir}")
    return sorted(sequences, key=lambda s: s.name)


def cmd_synth(config: RunConfig, run_id: str) -> list[str]:
    """Write ``synth.num_sequences`` sequences in MOT17 layout under ``paths.data_dir``."""
    storage = _output_storage(config.paths.data_dir)
    written = []
    for seq in synth_generate(config.synth):
        write_sequence(storage, seq)
        written.append(seq.name)
    log_event("synth_complete", run_id, sequences=len(written), data_dir=config.paths.data_dir)
    return written


def cmd_train(config: RunConfig, run_id: str) -> TrainReport:
    """Train on every sequence of the data directory; writes phase checkpoints, the model and the report."""
    sequences = load_sequences(config)
    storage = _output_storage(config.paths.output_dir)
    model, report = train_model(config, sequences, storage, run_id=run_id)
    report.final_checkpoint = MODEL_KEY
    storage.save_file(MODEL_KEY, model.to_bytes(), metadata={"run_id": run_id, "seed": config.seed})
    document = report.model_dump()
    document.update(initial_loss=report.initial_loss, final_loss=report.final_loss)
    storage.save_json("train_report.json", document)
    storage.save_json("run_config.json", config.model_dump(mode="json"))
    logger.info(
        f"Trained {len(report.phases)} phase(s): loss {report.initial_loss} -> {report.final_loss}, "
        f"model written to {storage.path(MODEL_KEY)}"
    )
    return report


def _checkpoint_path(config: RunConfig) -> str:
    return config.paths.checkpoint or str(Path(config.paths.output_dir) / MODEL_KEY)


def load_model(config: RunConfig) -> OneTrackNet:
    """Load the configured checkpoint; it must fit ``config.model``."""
    path = _checkpoint_path(config)
    valid, message = validate_checkpoint_file(path)
    if not valid:
        raise ConfigError(message, {"path": path})
    return OneTrackNet.from_bytes(Path(path).read_bytes(), config.model)


def cmd_track(config: RunConfig, run_id: str, sequence: str | None = None) -> list[SequenceResult]:
    """Track sequences with a trained model; writes ``results/<seq>.txt`` and per-sequence FPS."""
    model = load_model(config)
    sequences = load_sequences(config, sequence)
    storage = _output_storage(config.paths.output_dir)
    results = track_all(config, model, sequences)

    summary: dict[str, Any] = {"run_id": run_id, "sequences": {}}
    for result in results:
        storage.save_text(f"{RESULTS_PREFIX}/{result.name}.txt", write_results(result.frames, result.source_size))
        summary["sequences"][result.name] = {
            "frames": len(result.frames),
            "elapsed": result.elapsed,
            "fps": result.fps,
            "tracks": result.num_tracks,
        }
        log_event("track_summary", run_id, sequence=result.name, frames=len(result.frames), fps=result.fps)
    total_frames = sum(len(r.frames) for r in results)
    total_time = sum(r.elapsed for r in results)
    summary["fps"] = total_frames / total_time if total_time > 0 else None
    storage.save_json(TRACKING_SUMMARY_KEY, summary)
    return results


def _timings(storage: LocalStorage) -> dict[str, float]:
    if not storage.file_exists(TRACKING_SUMMARY_KEY):
        return {}
    sequences = storage.load_json(TRACKING_SUMMARY_KEY).get("sequences", {})
    return {name: float(entry["elapsed"]) for name, entry in sequences.items() if "elapsed" in entry}


def _evaluate_dir(directory: Path, results_dir: Path, iou_min: float, timings: dict[str, float]) -> EvalReport:
    name, gt, source_size = read_ground_truth(directory)
    results_file = results_dir / f"{name}.txt"
    if results_file.is_file():
        predictions = parse_mot(results_file.read_text(), source_size, AnnotationRole.PREDICTION)
    else:
        logger.warning(f"No results file for {name} in {results_dir}; scoring it as empty")
        predictions = {}
    return evaluate_sequence(gt, predictions, name, iou_min, timings.get(name))


def cmd_eval(config: RunConfig, run_id: str, results_dir: str | None = None) -> tuple[list[EvalReport], EvalReport]:
    """Score ``results/<seq>.txt`` against each sequence's ``gt/gt.txt``; writes summary JSON and table."""
    dirs = _sequence_dirs(config)
    storage = _output_storage(config.paths.output_dir)
    results_path = Path(results_dir) if results_dir else storage.path(RESULTS_PREFIX)
    timings = _timings(storage) if results_dir is None else {}

    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        reports = list(pool.map(lambda d: _evaluate_dir(d, results_path, config.eval_iou, timings), dirs))
    reports.sort(key=lambda r: r.sequence)
    aggregate = aggregate_reports(reports)
    write_reports(storage, REPORTS_PREFIX, reports, aggregate, run_id, per_frame=True)
    print(format_table(reports, aggregate), end="")
    log_event("eval_summary", run_id, sequences=len(reports), mota=aggregate.mota, hota=aggregate.hota)
    return reports, aggregate


def cmd_compare(config: RunConfig, run_id: str, study: str) -> ComparisonReport:
    """Run an ablation study on the data directory and write ``comparison_<study>.{json,txt}``."""
    sequences = load_sequences(config)
    storage = _output_storage(config.paths.output_dir)
    report = run_study(config, study, sequences, run_id, progress=lambda name: logger.info(f"Variant {name}"))
    table = format_comparison(report)
    storage.save_json(f"comparison_{study}.json", report.model_dump())
    storage.save_text(f"comparison_{study}.txt", table)
    print(table, end="")
    return report


def describe_errors(details: dict[str, Any]) -> Sequence[str]:
    """Flatten error details into printable lines."""
    lines = []
    for key, value in details.items():
        if key == "errors" and isinstance(value, list):
            lines.extend(f"  {'.'.join(str(p) for p in err['loc'])}: {err['msg']}" for err in value)
        else:
            lines.append(f"  {key}: {value}")
    return lines
