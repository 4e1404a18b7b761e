"""Center, focal, grid and combined losses."""
import numpy as np

from src.config.run_config import LossConfig
from src.models.outputs import ModelOutput
from src.numerics.tensor import Tensor
from src.training.targets import TargetMaps
from src.utils.error_handlers import ConfigError, DimensionError

PROB_EPS = 1e-7


def _check_shapes(pred: Tensor, target: np.ndarray) -> None:
    if pred.shape != target.shape:
        raise DimensionError(f"prediction {pred.shape} and target {target.shape} differ", [pred.shape, target.shape])


def center_loss(pred: Tensor, target: np.ndarray, weights: np.ndarray | None = None) -> Tensor:
    """Weighted binary cross-entropy averaged over all cells."""
    _check_shapes(pred, target)
    p = pred.clip(PROB_EPS, 1.0 - PROB_EPS)
    weights = np.ones_like(target) if weights is None else weights
    cross_entropy = p.log() * target + (1.0 - p).log() * (1.0 - target)
    return -(cross_entropy * weights).mean()


def focal_loss(pred: Tensor, target: np.ndarray, gamma: float = 4.0) -> Tensor:
    """-(1/N) Σ (1 - p)^γ · P · log p."""
    _check_shapes(pred, target)
    p = pred.clip(PROB_EPS, 1.0 - PROB_EPS)
    return -((1.0 - p).pow(gamma) * target * p.log()).mean()


def grid_loss(pred: Tensor, target: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean absolute error over masked cells of every channel; zero for an empty mask."""
    _check_shapes(pred, target)
    full_mask = np.broadcast_to(mask, pred.shape)
    count = float(full_mask.sum())
    if count == 0:
        return (pred * 0.0).sum()
    return ((pred - target).abs() * full_mask).sum() / count


def component_losses(output: ModelOutput, targets: TargetMaps, cfg: LossConfig) -> dict[str, Tensor]:
    """Every term, computed only for heads whose weight is non-zero."""
    terms: dict[str, Tensor] = {}
    if cfg.w1 > 0:
        terms["center"] = center_loss(output.heatmap, targets.heat, targets.pixel_weights)
        terms["focal"] = focal_loss(output.heatmap, targets.heat, cfg.gamma)
    if cfg.w2 > 0:
        terms["dims"] = grid_loss(output.dims, targets.dims, targets.mask)
    if cfg.w3 > 0:
        terms["disp"] = grid_loss(output.disp, targets.disp, targets.mask)
    return terms


def weighted_combination(
    heat_term: Tensor | float, dims_term: Tensor | float, disp_term: Tensor | float, cfg: LossConfig
) -> Tensor:
    """[heat·w1 + dims·w2 + disp·w3] / (w1 + w2 + w3); zero-weight terms drop out."""
    total_weight = cfg.w1 + cfg.w2 + cfg.w3
    if total_weight <= 0:
        raise ConfigError("loss weights w1, w2, w3 must not all be zero")
    parts = [(term, w) for term, w in ((heat_term, cfg.w1), (dims_term, cfg.w2), (disp_term, cfg.w3)) if w > 0]
    total: Tensor = Tensor(0.0)
    for term, w in parts:
        total = total + term * w
    return total / total_weight


def combined_loss(output: ModelOutput, targets: TargetMaps, cfg: LossConfig) -> Tensor:
    """Weighted mean of (center + focal), dims grid and displacement grid losses."""
    terms = component_losses(output, targets, cfg)
    heat_term = terms["center"] + terms["focal"] if "center" in terms else 0.0
    return weighted_combination(heat_term, terms.get("dims", 0.0), terms.get("disp", 0.0), cfg)
