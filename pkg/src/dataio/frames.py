"""Frame files: binary portable pixmaps and raw ``.npy`` dumps, numbered 000001, 000002, ..."""
import io
import logging
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from src.utils.error_handlers import FrameSequenceError

logger = logging.getLogger(__name__)

FRAME_SUFFIXES = (".ppm", ".npy")
NAME_WIDTH = 6


def frame_name(index: int, suffix: str = ".ppm") -> str:
    return f"{index:0{NAME_WIDTH}d}{suffix}"


def _resize(frame: np.ndarray, size: int) -> np.ndarray:
    """Bilinear resize of [3,H,W] to [3,size,size] without preserving aspect."""
    if frame.shape[1:] == (size, size):
        return frame
    channels = [
        np.asarray(Image.fromarray(channel.astype(np.float32)).resize((size, size), Image.Resampling.BILINEAR))
        for channel in frame
    ]
    return np.clip(np.stack(channels).astype(np.float64), 0.0, 1.0)


def decode_ppm(content: bytes) -> np.ndarray:
    """Decode an image to [3,H,W] in [0,1]."""
    with Image.open(io.BytesIO(content)) as image:
        pixels = np.asarray(image.convert("RGB"), dtype=np.float64) / 255.0
    return np.ascontiguousarray(pixels.transpose(2, 0, 1))


def encode_ppm(frame: np.ndarray) -> bytes:
    """Encode [3,H,W] in [0,1] as a binary (P6) portable pixmap."""
    pixels = np.ascontiguousarray(np.round(np.clip(frame, 0.0, 1.0) * 255.0).astype(np.uint8).transpose(1, 2, 0))
    buffer = io.BytesIO()
    Image.fromarray(pixels).save(buffer, format="PPM")
    return buffer.getvalue()


def _read_frame(path: Path) -> np.ndarray:
    try:
        if path.suffix == ".npy":
            frame = np.load(path, allow_pickle=False).astype(np.float64)
            if frame.ndim != 3 or frame.shape[0] != 3:
                raise FrameSequenceError(f"raw frame {path.name} must be [3,H,W], got {list(frame.shape)}")
            return np.clip(frame, 0.0, 1.0)
        return decode_ppm(path.read_bytes())
    except (OSError, ValueError, UnidentifiedImageError) as e:
        raise FrameSequenceError(f"cannot decode frame {path.name}: {e}") from e


def list_frame_files(directory: Path) -> list[Path]:
    """Numbered frame files in numeric order; a gap in the numbering is an error."""
    if not directory.is_dir():
        raise FrameSequenceError(f"frame directory not found: {directory}")
    numbered: dict[int, Path] = {}
    for path in directory.iterdir():
        if path.suffix in FRAME_SUFFIXES and path.stem.isdigit():
            numbered[int(path.stem)] = path
    if not numbered:
        raise FrameSequenceError(f"no frames in {directory}")
    missing = [frame_name(i, "") for i in range(1, max(numbered) + 1) if i not in numbered]
    if missing:
        raise FrameSequenceError(f"missing frame(s) in {directory}: {', '.join(missing)}", missing)
    return [numbered[i] for i in sorted(numbered)]


def load_frames(directory: str | Path, image_size: int) -> tuple[list[np.ndarray], tuple[int, int]]:
    """Decode, resize to ``image_size`` and normalize every frame of a directory.

    Returns:
        Tuple of (frames [3,S,S] in [0,1], source (height, width) of the first frame)
    """
    frames = []
    source_size: tuple[int, int] | None = None
    for path in list_frame_files(Path(directory)):
        frame = _read_frame(path)
        if source_size is None:
            source_size = (int(frame.shape[1]), int(frame.shape[2]))
        frames.append(_resize(frame, image_size))
    assert source_size is not None
    logger.debug(f"Loaded {len(frames)} frames from {directory}")
    return frames, source_size


def frame_size(directory: str | Path) -> tuple[int, int]:
    """(height, width) of the first frame of a directory."""
    first = _read_frame(list_frame_files(Path(directory))[0])
    return int(first.shape[1]), int(first.shape[2])
