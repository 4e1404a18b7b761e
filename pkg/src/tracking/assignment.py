"""Optimal rectangular assignment with forbidden pairs, and association costs."""
import math
from collections.abc import Sequence

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.config.run_config import AssocConfig, CostMode
from src.models.tracking import Detection, Track
from src.tracking.geometry import iou


def hungarian(cost: np.ndarray) -> list[tuple[int, int]]:
    """Minimum-cost injective assignment of rows to columns.

    ``inf`` entries are forbidden pairs. The solution uses as many feasible
    pairs as possible and, among those, has the least total cost. Pairs come
    back sorted by row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.size == 0:
        return []
    feasible = np.isfinite(cost)
    if not feasible.any():
        return []
    # a forbidden entry must cost more than any spread of finite totals
    big = 2.0 * np.abs(cost[feasible]).sum() + 1.0
    padded = np.where(feasible, cost, big)
    rows, cols = linear_sum_assignment(padded)
    return [(int(r), int(c)) for r, c in zip(rows, cols, strict=True) if feasible[r, c]]


def assignment_cost(cost: np.ndarray, pairs: Sequence[tuple[int, int]]) -> float:
    return float(sum(cost[r, c] for r, c in pairs))


def build_cost(detections: Sequence[Detection], tracks: Sequence[Track], cfg: AssocConfig) -> np.ndarray:
    """Dissimilarity between each detection moved back by its own displacement and each track's last box."""
    cost = np.full((len(detections), len(tracks)), math.inf)
    for i, det in enumerate(detections):
        origin = det.box.shifted(-det.disp[0], -det.disp[1])
        for j, track in enumerate(tracks):
            if cfg.cost_mode == CostMode.DISTANCE:
                distance = math.hypot(origin.cx - track.last_box.cx, origin.cy - track.last_box.cy)
                if distance <= cfg.max_center_distance:
                    cost[i, j] = distance
            else:
                overlap = iou(origin, track.last_box)
                if overlap >= cfg.match_min_iou:
                    cost[i, j] = 1.0 - overlap
    return cost
