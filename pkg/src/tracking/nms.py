"""Greedy non-maximum suppression."""
from src.models.tracking import Detection
from src.tracking.geometry import iou


def nms(detections: list[Detection], threshold: float) -> list[Detection]:
    """Keep the highest-score box, drop boxes overlapping it with IoU > threshold, repeat.

    Output is in descending score; equal scores keep their input order.
    """
    ordered = sorted(detections, key=lambda det: -det.score)
    kept: list[Detection] = []
    for candidate in ordered:
        if all(iou(candidate.box, chosen.box) <= threshold for chosen in kept):
            kept.append(candidate)
    return kept
