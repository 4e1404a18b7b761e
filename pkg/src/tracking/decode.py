"""Turn output grids into scored detections."""
import numpy as np
from scipy.ndimage import maximum_filter

from src.config.run_config import AssocConfig, DisplacementNorm
from src.encoding.displacement import denormalize_displacement
from src.models.outputs import ModelOutput
from src.models.tracking import BBox, Detection
from src.tracking.nms import nms

Peak = tuple[tuple[int, int], float]

# sigmoid underflow can reach 0.0 in float64
MIN_SIZE = 1e-6


def extract_peaks(heatmap: np.ndarray, threshold: float) -> list[Peak]:
    """Cells that are >= all 8 neighbours and >= ``threshold``.

    Accepts [R,R] or [1,R,R]; peaks come back in descending score, row-major on ties.
    """
    grid = heatmap[0] if heatmap.ndim == 3 else heatmap
    local_max = maximum_filter(grid, size=3, mode="constant", cval=-np.inf)
    rows, cols = np.nonzero((grid >= local_max) & (grid >= threshold))
    peaks = [((int(i), int(j)), float(grid[i, j])) for i, j in zip(rows, cols, strict=True)]
    return sorted(peaks, key=lambda peak: -peak[1])


def decode(peaks: list[Peak], dims: np.ndarray, disp: np.ndarray, norm: DisplacementNorm) -> list[Detection]:
    """Read box size and de-normalized motion at each peak; the center is the cell center."""
    side = dims.shape[-1]
    detections = []
    for (i, j), score in peaks:
        w = max(float(dims[0, i, j]), MIN_SIZE)
        h = max(float(dims[1, i, j]), MIN_SIZE)
        u = float(np.clip(disp[0, i, j], -1.0, 1.0))
        v = float(np.clip(disp[1, i, j], -1.0, 1.0))
        box = BBox((j + 0.5) / side, (i + 0.5) / side, w, h)
        detections.append(Detection(box=box, score=score, disp=denormalize_displacement(u, v, norm)))
    return detections


def detect(output: ModelOutput, assoc: AssocConfig, norm: DisplacementNorm) -> list[Detection]:
    """Threshold, decode and suppress one frame's output grids."""
    peaks = extract_peaks(output.heatmap.data, assoc.heat_threshold)
    detections = decode(peaks, output.dims.data, output.disp.data, norm)
    return nms(detections, assoc.nms_iou)
