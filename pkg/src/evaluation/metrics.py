"""CLEAR MOT, per-frame HOTA, identity and speed metrics."""
import logging
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np

from src.evaluation.matching import match_sequence
from src.models.annotations import FrameAnnotations
from src.models.reports import EvalReport, FrameDiagnostics
from src.tracking.assignment import hungarian
from src.tracking.geometry import iou
from src.utils.error_handlers import MetricUndefinedError

logger = logging.getLogger(__name__)


def mota(fn: Sequence[int], fp: Sequence[int], idsw: Sequence[int], num_gt: Sequence[int]) -> float:
    """1 - Σ(FN + FP + IDSW) / ΣGT over per-frame counts; may be negative."""
    total_gt = sum(num_gt)
    if total_gt == 0:
        raise MetricUndefinedError("MOTA", "no ground-truth objects")
    return 1.0 - (sum(fn) + sum(fp) + sum(idsw)) / total_gt


def motp(frame_ious: Sequence[Sequence[float]]) -> float:
    """Mean of 1 - IoU over all matched pairs; lower is better."""
    count = sum(len(ious) for ious in frame_ious)
    if count == 0:
        raise MetricUndefinedError("MOTP", "no matched pairs")
    return sum(1.0 - value for ious in frame_ious for value in ious) / count


def hota_frame_term(num_gt: int, num_pred: int, ious: Sequence[float]) -> float:
    """(ΣIoU / |M|) · |M| / (|G| + |P| - |M|), with 1 for an entirely empty frame and 0 without matches."""
    matched = len(ious)
    if num_gt == 0 and num_pred == 0:
        return 1.0
    if matched == 0:
        return 0.0
    return (sum(ious) / matched) * matched / (num_gt + num_pred - matched)


def hota_score(frames: Sequence[FrameDiagnostics]) -> float:
    """Frame-averaged IoU-weighted overlap score."""
    if not frames:
        raise MetricUndefinedError("hota_score", "no frames")
    terms = [hota_frame_term(f.num_gt, f.num_pred, [m.iou for m in f.matches]) for f in frames]
    return sum(terms) / len(terms)


def ids_count(frames: Sequence[FrameDiagnostics]) -> int:
    """Times a ground-truth id is matched to a prediction id other than its last one."""
    last: dict[int, int] = {}
    switches = 0
    for frame in frames:
        for m in frame.matches:
            if m.gt_id in last and last[m.gt_id] != m.pred_id:
                switches += 1
            last[m.gt_id] = m.pred_id
    return switches


@dataclass(frozen=True)
class IdentityScores:
    idtp: int
    idfp: int
    idfn: int
    idf1: float


def identity_scores(
    gt_frames: Mapping[int, FrameAnnotations],
    pred_frames: Mapping[int, FrameAnnotations],
    iou_min: float = 0.5,
) -> IdentityScores:
    """Globally optimal one-to-one gt id / pred id correspondence and the resulting IDF1."""
    gt_ids = sorted({obj.id for f in gt_frames.values() for obj in f.objects})
    pred_ids = sorted({obj.id for f in pred_frames.values() for obj in f.objects})
    total_gt = sum(len(f.objects) for f in gt_frames.values())
    total_pred = sum(len(f.objects) for f in pred_frames.values())
    if total_gt + total_pred == 0:
        return IdentityScores(0, 0, 0, 1.0)

    idtp = 0
    if gt_ids and pred_ids:
        gt_col = {gid: i for i, gid in enumerate(gt_ids)}
        pred_col = {pid: j for j, pid in enumerate(pred_ids)}
        overlap = np.zeros((len(gt_ids), len(pred_ids)))
        for frame, gt in gt_frames.items():
            pred = pred_frames.get(frame)
            if pred is None:
                continue
            for g in gt.objects:
                for p in pred.objects:
                    if iou(g.box, p.box) >= iou_min:
                        overlap[gt_col[g.id], pred_col[p.id]] += 1
        idtp = int(sum(overlap[r, c] for r, c in hungarian(-overlap)))
    return IdentityScores(
        idtp=idtp,
        idfp=total_pred - idtp,
        idfn=total_gt - idtp,
        idf1=2.0 * idtp / (total_gt + total_pred),
    )


def idf1(
    gt_frames: Mapping[int, FrameAnnotations],
    pred_frames: Mapping[int, FrameAnnotations],
    iou_min: float = 0.5,
) -> float:
    """2·IDTP / (2·IDTP + IDFP + IDFN)."""
    return identity_scores(gt_frames, pred_frames, iou_min).idf1


def fps(total_time: float, num_frames: int) -> float:
    """Frames per second over a timed run."""
    if num_frames == 0:
        return 0.0
    if total_time <= 0:
        raise MetricUndefinedError("FPS", "total time is zero")
    return num_frames / total_time


def evaluate_sequence(
    gt_frames: Mapping[int, FrameAnnotations],
    pred_frames: Mapping[int, FrameAnnotations],
    name: str = "sequence",
    iou_min: float = 0.5,
    elapsed: float | None = None,
) -> EvalReport:
    """Full metric suite for one sequence; undefined MOTA/MOTP are reported as ``None``."""
    frames = match_sequence(gt_frames, pred_frames, iou_min)
    ious = [[m.iou for m in f.matches] for f in frames]
    identity = identity_scores(gt_frames, pred_frames, iou_min)
    report = EvalReport(
        sequence=name,
        ids=ids_count(frames),
        fn=sum(f.fn for f in frames),
        fp=sum(f.fp for f in frames),
        num_gt=sum(f.num_gt for f in frames),
        num_pred=sum(f.num_pred for f in frames),
        num_matches=sum(len(i) for i in ious),
        distance_sum=sum(1.0 - v for i in ious for v in i),
        idtp=identity.idtp,
        idf1=identity.idf1,
        num_frames=len(frames),
        elapsed=elapsed,
        per_frame=frames,
    )
    if frames:
        report.hota_sum = sum(hota_frame_term(f.num_gt, f.num_pred, [m.iou for m in f.matches]) for f in frames)
        report.hota = hota_score(frames)
    try:
        report.mota = mota([f.fn for f in frames], [f.fp for f in frames], [f.idsw for f in frames], [f.num_gt for f in frames])
    except MetricUndefinedError as e:
        logger.warning(f"{name}: {e.message}")
    try:
        report.motp = motp(ious)
    except MetricUndefinedError as e:
        logger.warning(f"{name}: {e.message}")
    if elapsed is not None:
        report.fps = fps(elapsed, len(frames))
    return report


def aggregate_reports(reports: Sequence[EvalReport]) -> EvalReport:
    """Fold per-sequence reports; ratios are recomputed from the summed counts."""
    total = EvalReport(sequence="aggregate")
    for r in sorted(reports, key=lambda r: r.sequence):
        total.ids += r.ids
        total.fn += r.fn
        total.fp += r.fp
        total.num_gt += r.num_gt
        total.num_pred += r.num_pred
        total.num_matches += r.num_matches
        total.distance_sum += r.distance_sum
        total.idtp += r.idtp
        total.num_frames += r.num_frames
        total.hota_sum += r.hota_sum
    if total.num_gt:
        total.mota = 1.0 - (total.fn + total.fp + total.ids) / total.num_gt
    if total.num_matches:
        total.motp = total.distance_sum / total.num_matches
    total.idf1 = 2.0 * total.idtp / (total.num_gt + total.num_pred) if total.num_gt + total.num_pred else 1.0
    total.hota = total.hota_sum / total.num_frames if total.num_frames else 0.0
    timings = [r.elapsed for r in reports]
    if reports and all(t is not None for t in timings):
        total.elapsed = float(sum(t for t in timings if t is not None))
        total.fps = fps(total.elapsed, total.num_frames)
    return total
