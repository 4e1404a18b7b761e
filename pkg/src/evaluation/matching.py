"""Per-frame ground-truth to prediction matching."""
from collections.abc import Mapping, Sequence

import numpy as np

from src.models.annotations import FrameAnnotations
from src.models.reports import FrameDiagnostics, MatchedPair
from src.tracking.assignment import hungarian
from src.tracking.geometry import iou, iou_matrix
from src.utils.error_handlers import ContractError

MOT_IOU = 0.5


def match_frame(
    gt: FrameAnnotations,
    pred: FrameAnnotations,
    iou_min: float = MOT_IOU,
    previous: Mapping[int, int] | None = None,
) -> list[MatchedPair]:
    """Match one frame's ground truth and predictions.

    Pairs matched in the previous frame (``previous``: gt id -> pred id) are
    kept while their IoU stays >= ``iou_min``; the rest are matched by an
    optimal assignment over pairs with IoU >= ``iou_min``.
    """
    if gt.frame != pred.frame:
        raise ContractError(f"cannot match frame {gt.frame} against frame {pred.frame}")
    gt_by_id, pred_by_id = gt.by_id(), pred.by_id()
    matches: list[MatchedPair] = []

    for gt_id, pred_id in (previous or {}).items():
        if gt_id in gt_by_id and pred_id in pred_by_id:
            overlap = iou(gt_by_id[gt_id].box, pred_by_id[pred_id].box)
            if overlap >= iou_min:
                matches.append(MatchedPair(gt_id=gt_id, pred_id=pred_id, iou=overlap))

    kept_gt = {m.gt_id for m in matches}
    kept_pred = {m.pred_id for m in matches}
    open_gt = [obj for obj in gt.objects if obj.id not in kept_gt]
    open_pred = [obj for obj in pred.objects if obj.id not in kept_pred]
    if open_gt and open_pred:
        overlaps = iou_matrix([o.box for o in open_gt], [o.box for o in open_pred])
        cost = np.where(overlaps >= iou_min, 1.0 - overlaps, np.inf)
        for r, c in hungarian(cost):
            matches.append(MatchedPair(gt_id=open_gt[r].id, pred_id=open_pred[c].id, iou=float(overlaps[r, c])))
    return sorted(matches, key=lambda m: m.gt_id)


def match_sequence(
    gt_frames: Mapping[int, FrameAnnotations],
    pred_frames: Mapping[int, FrameAnnotations],
    iou_min: float = MOT_IOU,
) -> list[FrameDiagnostics]:
    """Match every frame present in either input, in frame order, with id-switch counts."""
    diagnostics: list[FrameDiagnostics] = []
    previous: dict[int, int] = {}
    last_pred: dict[int, int] = {}
    for frame in sorted(set(gt_frames) | set(pred_frames)):
        gt = gt_frames.get(frame, FrameAnnotations(frame))
        pred = pred_frames.get(frame, FrameAnnotations(frame))
        matches = match_frame(gt, pred, iou_min, previous)
        switches = 0
        for m in matches:
            if m.gt_id in last_pred and last_pred[m.gt_id] != m.pred_id:
                switches += 1
            last_pred[m.gt_id] = m.pred_id
        previous = {m.gt_id: m.pred_id for m in matches}
        diagnostics.append(
            FrameDiagnostics(
                frame=frame,
                num_gt=len(gt.objects),
                num_pred=len(pred.objects),
                fn=len(gt.objects) - len(matches),
                fp=len(pred.objects) - len(matches),
                idsw=switches,
                matches=matches,
            )
        )
    return diagnostics


def index_frames(frames: Sequence[FrameAnnotations]) -> dict[int, FrameAnnotations]:
    return {f.frame: f for f in frames}
