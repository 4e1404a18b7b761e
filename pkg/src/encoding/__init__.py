"""Frame windows, token encodings and displacement normalization."""
from .displacement import ClampStats, denormalize_displacement, normalize_displacement
from .embedding import ChannelEmbeddings, apply_embedding
from .frames import FrameWindow, build_windows, patchify_project, stack_window

__all__ = [
    "ChannelEmbeddings",
    "ClampStats",
    "FrameWindow",
    "apply_embedding",
    "build_windows",
    "denormalize_displacement",
    "normalize_displacement",
    "patchify_project",
    "stack_window",
]
