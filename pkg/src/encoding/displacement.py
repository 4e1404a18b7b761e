"""Per-axis affine mapping between image-fraction displacements and [-1, 1]."""
import logging
from dataclasses import dataclass

import numpy as np

from src.config.run_config import DisplacementNorm
from src.utils.error_handlers import ContractError

logger = logging.getLogger(__name__)


@dataclass
class ClampStats:
    """Counts displacement components that fell outside the configured range."""

    events: int = 0


def _to_unit(value: float, low: float, high: float) -> float:
    return 2.0 * (value - low) / (high - low) - 1.0


def _from_unit(value: float, low: float, high: float) -> float:
    return (value + 1.0) * (high - low) / 2.0 + low


def normalize_displacement(
    d: tuple[float, float], norm: DisplacementNorm, stats: ClampStats | None = None
) -> tuple[float, float]:
    """Map (dx, dy) to (u, v) in [-1, 1]², clamping and counting out-of-range components."""
    u = _to_unit(d[0], norm.min_x, norm.max_x)
    v = _to_unit(d[1], norm.min_y, norm.max_y)
    clamped = 0
    if not -1.0 <= u <= 1.0:
        u = float(np.clip(u, -1.0, 1.0))
        clamped += 1
    if not -1.0 <= v <= 1.0:
        v = float(np.clip(v, -1.0, 1.0))
        clamped += 1
    if clamped:
        logger.debug(f"Clamped displacement {d} to ({u}, {v})")
        if stats is not None:
            stats.events += clamped
    return u, v


def denormalize_displacement(u: float, v: float, norm: DisplacementNorm) -> tuple[float, float]:
    """Inverse of ``normalize_displacement`` on [-1, 1]²."""
    if not (-1.0 <= u <= 1.0 and -1.0 <= v <= 1.0):
        raise ContractError("normalized displacement must lie in [-1, 1]", {"u": u, "v": v})
    return _from_unit(u, norm.min_x, norm.max_x), _from_unit(v, norm.min_y, norm.max_y)
