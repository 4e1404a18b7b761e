"""Training samples: one frame window with its rendered targets."""
import logging
from collections.abc import Iterable
from dataclasses import dataclass

from src.config.run_config import DisplacementNorm, LossConfig, ModelConfig
from src.encoding.displacement import ClampStats
from src.encoding.frames import FrameWindow, build_windows
from src.models.annotations import SequenceData
from src.training.targets import TargetMaps, render_targets
from src.utils.error_handlers import ContractError

logger = logging.getLogger(__name__)


@dataclass
class TrainingSample:
    sequence: str
    frame: int
    window: FrameWindow
    targets: TargetMaps


def build_samples(
    sequences: Iterable[SequenceData],
    model_cfg: ModelConfig,
    loss_cfg: LossConfig,
    norm: DisplacementNorm,
) -> list[TrainingSample]:
    """Window every frame of every sequence and render its targets."""
    samples: list[TrainingSample] = []
    stats = ClampStats()
    window = model_cfg.pipeline.window
    for seq in sequences:
        for frame_window in build_windows(seq.frames, window, seq.source_size):
            t = frame_window.frame_index
            previous = seq.frame_annotations(t - 1) if t > 1 else None
            targets = render_targets(
                seq.frame_annotations(t), previous, model_cfg.grid_size, loss_cfg, norm, stats
            )
            samples.append(TrainingSample(seq.name, t, frame_window, targets))
    if not samples:
        raise ContractError("training data is empty")
    if stats.events:
        logger.warning(f"{stats.events} displacement component(s) clamped while rendering targets")
    logger.info(f"Built {len(samples)} training samples")
    return samples
