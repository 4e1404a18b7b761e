"""Temporal windows: channel stacking and patch projection."""
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from src.config.run_config import PipelineConfig
from src.numerics.tensor import Tensor, concat, conv2d
from src.utils.error_handlers import ConfigError, ContractError


@dataclass
class FrameWindow:
    """W consecutive frames, oldest first, each [3,S,S] with values in [0,1].

    ``source_size`` is the original (height, width) in pixels and
    ``frame_index`` the 1-based index of the newest frame.
    """

    frames: list[np.ndarray]
    source_size: tuple[int, int]
    frame_index: int

    def __post_init__(self) -> None:
        if not self.frames:
            raise ContractError("a frame window needs at least one frame")
        shape = self.frames[0].shape
        if len(shape) != 3 or shape[0] != 3 or shape[1] != shape[2]:
            raise ContractError(f"frames must be [3,S,S], got {shape}")
        for frame in self.frames:
            if frame.shape != shape:
                raise ContractError("all frames in a window must share one shape", {"shapes": [f.shape for f in self.frames]})
            if frame.min() < 0.0 or frame.max() > 1.0:
                raise ContractError("frame values must lie in [0,1]")

    @property
    def window(self) -> int:
        return len(self.frames)

    @property
    def image_size(self) -> int:
        return int(self.frames[0].shape[-1])

    def check(self, cfg: PipelineConfig) -> None:
        """Raise ``ConfigError`` when the window does not fit ``cfg``."""
        if self.window != cfg.window or self.image_size != cfg.image_size:
            raise ConfigError(
                f"window of {self.window} frames at {self.image_size}px does not match "
                f"config W={cfg.window}, S={cfg.image_size}"
            )


def build_windows(
    frames: Sequence[np.ndarray], window: int, source_size: tuple[int, int]
) -> list[FrameWindow]:
    """One window per frame; the first frames repeat frame 1 to fill the window."""
    windows = []
    for t in range(len(frames)):
        indices = [max(0, t - offset) for offset in range(window - 1, -1, -1)]
        windows.append(FrameWindow([frames[i] for i in indices], source_size, t + 1))
    return windows


def stack_window(window: FrameWindow) -> Tensor:
    """Concatenate the frames oldest-first along channels: [3W,S,S]."""
    return concat([Tensor(frame) for frame in window.frames], axis=0)


def unstack_window(stacked: Tensor, window: int) -> list[np.ndarray]:
    """Inverse of ``stack_window``: split [3W,S,S] back into W frames."""
    if stacked.shape[0] != 3 * window:
        raise ContractError(f"expected {3 * window} channels, got {stacked.shape[0]}")
    return [stacked.data[3 * w : 3 * w + 3].copy() for w in range(window)]


def patchify_project(stacked: Tensor, proj: Tensor) -> Tensor:
    """Project non-overlapping P×P patches to tokens [N_p, n_d], row-major patch order."""
    patch = proj.shape[-1]
    size = stacked.shape[-1]
    if size % patch != 0:
        raise ConfigError(f"image size {size} is not divisible by patch size {patch}")
    maps = conv2d(stacked, proj, stride=patch)
    embed_dim, grid, _ = maps.shape
    return maps.reshape(embed_dim, grid * grid).T


def frame_partial_projections(stacked: Tensor, proj: Tensor, window: int) -> list[Tensor]:
    """Per-frame slices of the stacked projection; their sum equals ``patchify_project``."""
    if stacked.shape[0] != 3 * window or proj.shape[1] != 3 * window:
        raise ConfigError(f"stacked input and projection must carry {3 * window} channels")
    return [
        patchify_project(stacked[3 * w : 3 * w + 3], proj[:, 3 * w : 3 * w + 3]) for w in range(window)
    ]
