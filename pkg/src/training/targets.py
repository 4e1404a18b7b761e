"""Ground-truth grids for the three heads."""
import logging
import math
from dataclasses import dataclass

import numpy as np

from src.config.run_config import DisplacementNorm, LossConfig
from src.encoding.displacement import ClampStats, normalize_displacement
from src.models.annotations import FrameAnnotations

logger = logging.getLogger(__name__)


@dataclass
class TargetMaps:
    """Training targets on the R x R output grid.

    heat [1,R,R]: Gaussian center splats, exactly 1 at center cells.
    pixel_weights [1,R,R]: per-cell weights of the center loss.
    dims [2,R,R], disp [2,R,R]: regression targets, zero off the mask.
    mask [1,R,R]: 1 at object center cells.
    """

    heat: np.ndarray
    pixel_weights: np.ndarray
    dims: np.ndarray
    disp: np.ndarray
    mask: np.ndarray
    skipped: int = 0

    @property
    def num_objects(self) -> int:
        return int(self.mask.sum())


def gaussian_sigma(w: float, h: float, grid_size: int, cfg: LossConfig) -> float:
    """Object-size-scaled spread in cells: max(floor, diagonal / divisor)."""
    diagonal = math.hypot(w * grid_size, h * grid_size)
    return max(cfg.sigma_floor, diagonal / cfg.sigma_divisor)


def render_targets(
    current: FrameAnnotations,
    previous: FrameAnnotations | None,
    grid_size: int,
    cfg: LossConfig,
    norm: DisplacementNorm,
    stats: ClampStats | None = None,
) -> TargetMaps:
    """Render heat, dims, displacement and mask grids for the newest frame.

    Displacement is current minus previous center for ids present in both
    frames and zero motion otherwise. Objects centered outside the image are
    skipped and counted.
    """
    heat = np.zeros((1, grid_size, grid_size))
    dims = np.zeros((2, grid_size, grid_size))
    disp = np.zeros((2, grid_size, grid_size))
    mask = np.zeros((1, grid_size, grid_size))
    rows, cols = np.mgrid[0:grid_size, 0:grid_size]
    earlier = previous.by_id() if previous is not None else {}
    skipped = 0

    for obj in current.objects:
        box = obj.box
        if not (0.0 <= box.cx < 1.0 and 0.0 <= box.cy < 1.0):
            skipped += 1
            continue
        i, j = int(box.cy * grid_size), int(box.cx * grid_size)
        sigma = gaussian_sigma(box.w, box.h, grid_size, cfg)
        splat = np.exp(-((rows - i) ** 2 + (cols - j) ** 2) / (2.0 * sigma * sigma))
        np.maximum(heat[0], splat, out=heat[0])
        heat[0, i, j] = 1.0

        motion = (0.0, 0.0)
        if obj.id in earlier:
            before = earlier[obj.id].box
            motion = (box.cx - before.cx, box.cy - before.cy)
        dims[:, i, j] = (box.w, box.h)
        disp[:, i, j] = normalize_displacement(motion, norm, stats)
        mask[0, i, j] = 1.0

    if skipped:
        logger.warning(f"Skipped {skipped} object(s) centered outside frame {current.frame}")
    return TargetMaps(
        heat=heat,
        pixel_weights=1.0 + cfg.center_alpha * heat,
        dims=dims,
        disp=disp,
        mask=mask,
        skipped=skipped,
    )
