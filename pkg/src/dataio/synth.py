"""Seeded synthetic sequences: moving rectangles, a textured background and occluders."""
import configparser
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from src.config.run_config import SynthConfig
from src.dataio.frames import encode_ppm, frame_name, frame_size, load_frames
from src.dataio.mot_format import parse_mot, write_ground_truth
from src.models.annotations import AnnotatedBox, FrameAnnotations, SequenceData
from src.models.tracking import BBox
from src.storage.interface import StorageInterface

logger = logging.getLogger(__name__)

FRAME_RATE = 30
OCCLUDER_SIZE = (0.3, 0.3)
OCCLUDER_SHADE = 0.05


@dataclass
class MovingObject:
    """Axis-aligned rectangle moving at a constant per-frame velocity plus bounded jitter."""

    id: int
    cx: float
    cy: float
    w: float
    h: float
    velocity: tuple[float, float]
    color: tuple[float, float, float]
    steps: list[tuple[float, float]] = field(default_factory=list)

    @property
    def box(self) -> BBox:
        return BBox(self.cx, self.cy, self.w, self.h)

    def advance(self, jitter: tuple[float, float] = (0.0, 0.0)) -> tuple[float, float]:
        """Move one frame, reflecting the velocity at the image border; returns the applied step."""
        vx, vy = self.velocity
        dx, dy = vx + jitter[0], vy + jitter[1]
        if not self.w / 2 <= self.cx + dx <= 1 - self.w / 2:
            vx, dx = -vx, -dx
        if not self.h / 2 <= self.cy + dy <= 1 - self.h / 2:
            vy, dy = -vy, -dy
        self.velocity = (vx, vy)
        self.cx += dx
        self.cy += dy
        self.steps.append((dx, dy))
        return dx, dy


@dataclass(frozen=True)
class OccluderEvent:
    start: int
    duration: int
    box: BBox

    def covers(self, frame: int) -> bool:
        return self.start <= frame < self.start + self.duration


def _pixel_span(low: float, high: float, size: int) -> slice:
    return slice(max(0, int(round(low * size))), min(size, int(round(high * size))))


def _paint(canvas: np.ndarray, box: BBox, color: tuple[float, float, float]) -> None:
    size = canvas.shape[-1]
    rows, cols = _pixel_span(box.top, box.bottom, size), _pixel_span(box.left, box.right, size)
    canvas[:, rows, cols] = np.asarray(color)[:, None, None]


def _visible_fraction(box: BBox, occluders: list[BBox]) -> float:
    hidden = 0.0
    for occluder in occluders:
        w = min(box.right, occluder.right) - max(box.left, occluder.left)
        h = min(box.bottom, occluder.bottom) - max(box.top, occluder.top)
        if w > 0 and h > 0:
            hidden = max(hidden, w * h / box.area)
    return float(np.clip(1.0 - hidden, 0.0, 1.0))


def _background(rng: np.random.Generator, size: int) -> np.ndarray:
    coarse = rng.uniform(0.05, 0.25, size=(3, size // 8 + 1, size // 8 + 1))
    texture = np.repeat(np.repeat(coarse, 8, axis=1), 8, axis=2)[:, :size, :size]
    return np.clip(texture + rng.uniform(-0.02, 0.02, size=(3, size, size)), 0.0, 1.0)


def _spawn_objects(rng: np.random.Generator, cfg: SynthConfig) -> list[MovingObject]:
    count = int(rng.integers(cfg.min_objects, cfg.max_objects + 1))
    intensities = rng.permutation(np.linspace(0.45, 1.0, max(count, 1)))
    objects = []
    for k in range(count):
        w, h = rng.uniform(cfg.min_size, cfg.max_size, size=2)
        cx = rng.uniform(w / 2, 1 - w / 2)
        cy = rng.uniform(h / 2, 1 - h / 2)
        vx, vy = rng.uniform(-cfg.velocity_max, cfg.velocity_max, size=2)
        red, green, blue = (intensities[k] * rng.uniform(0.7, 1.0, size=3)).tolist()
        objects.append(
            MovingObject(k + 1, float(cx), float(cy), float(w), float(h), (float(vx), float(vy)), (red, green, blue))
        )
    return objects


def generate_sequence(cfg: SynthConfig, index: int) -> SequenceData:
    """Render one sequence; every object appears in the ground truth of every frame."""
    rng = np.random.default_rng([cfg.seed, index])
    size = cfg.image_size
    background = _background(rng, size)
    objects = _spawn_objects(rng, cfg)

    events = []
    for _ in range(cfg.occluder_events if objects else 0):
        start = int(rng.integers(1, cfg.frames_per_sequence + 1))
        target = objects[int(rng.integers(len(objects)))]
        events.append(OccluderEvent(start, cfg.occluder_duration, BBox(target.cx, target.cy, *OCCLUDER_SIZE)))

    frames: list[np.ndarray] = []
    annotations: dict[int, FrameAnnotations] = {}
    for t in range(1, cfg.frames_per_sequence + 1):
        if t > 1:
            for obj in objects:
                jx, jy = rng.uniform(-cfg.jitter, cfg.jitter, size=2).tolist()
                obj.advance((jx, jy))
        canvas = background.copy()
        for obj in objects:
            _paint(canvas, obj.box, obj.color)
        occluders = [e.box for e in events if e.covers(t)]
        for occluder in occluders:
            _paint(canvas, occluder, (OCCLUDER_SHADE,) * 3)
        frames.append(canvas)
        annotations[t] = FrameAnnotations(
            t, [AnnotatedBox(obj.id, obj.box, visibility=_visible_fraction(obj.box, occluders)) for obj in objects]
        )
    return SequenceData(f"synth-{index:02d}", frames, annotations, (size, size))


def synth_generate(cfg: SynthConfig) -> list[SequenceData]:
    """All sequences of ``cfg``; identical seeds give bit-identical output."""
    sequences = [generate_sequence(cfg, i) for i in range(cfg.num_sequences)]
    logger.info(f"Generated {len(sequences)} synthetic sequences of {cfg.frames_per_sequence} frames")
    return sequences


def _seqinfo(seq: SequenceData) -> str:
    parser = configparser.ConfigParser()
    height, width = seq.source_size
    parser["Sequence"] = {
        "name": seq.name,
        "imDir": "img1",
        "frameRate": str(FRAME_RATE),
        "seqLength": str(seq.num_frames),
        "imWidth": str(width),
        "imHeight": str(height),
        "imExt": ".ppm",
    }
    buffer = io.StringIO()
    parser.write(buffer)
    return buffer.getvalue()


def write_sequence(storage: StorageInterface, seq: SequenceData, prefix: str = "") -> str:
    """Write ``<seq>/img1/000001.ppm ...``, ``<seq>/gt/gt.txt`` and ``<seq>/seqinfo.ini``."""
    root = f"{prefix}/{seq.name}" if prefix else seq.name
    for t, frame in enumerate(seq.frames, start=1):
        storage.save_file(f"{root}/img1/{frame_name(t)}", encode_ppm(frame))
    storage.save_text(f"{root}/gt/gt.txt", write_ground_truth(seq.annotations.values(), seq.source_size))
    return storage.save_text(f"{root}/seqinfo.ini", _seqinfo(seq))


def _sequence_info(root: Path) -> tuple[str, tuple[int, int] | None]:
    """Name and (height, width) from ``seqinfo.ini`` when present."""
    info = root / "seqinfo.ini"
    if not info.is_file():
        return root.name, None
    parser = configparser.ConfigParser()
    parser.read(info)
    section = parser["Sequence"]
    if "imheight" not in section or "imwidth" not in section:
        return section.get("name", root.name), None
    return section.get("name", root.name), (int(section["imheight"]), int(section["imwidth"]))


def read_sequence(path: str | Path, image_size: int) -> SequenceData:
    """Load a MOT17-layout sequence directory; a missing gt file gives empty annotations."""
    root = Path(path)
    frames, decoded_size = load_frames(root / "img1", image_size)
    name, source_size = _sequence_info(root)
    source_size = source_size or decoded_size
    gt_path = root / "gt" / "gt.txt"
    annotations = parse_mot(gt_path.read_text(), source_size) if gt_path.is_file() else {}
    return SequenceData(name, frames, annotations, source_size)


def read_ground_truth(path: str | Path) -> tuple[str, dict[int, FrameAnnotations], tuple[int, int]]:
    """Ground truth of a sequence directory without decoding every frame.

    Returns:
        Tuple of (sequence name, annotations by frame, source (height, width))
    """
    root = Path(path)
    name, source_size = _sequence_info(root)
    if source_size is None:
        source_size = frame_size(root / "img1")
    gt_path = root / "gt" / "gt.txt"
    annotations = parse_mot(gt_path.read_text(), source_size) if gt_path.is_file() else {}
    return name, annotations, source_size


def list_sequences(data_dir: str | Path) -> list[Path]:
    """Sequence directories (those holding ``img1/``) in name order."""
    root = Path(data_dir)
    if not root.is_dir():
        return []
    return sorted(p for p in root.iterdir() if (p / "img1").is_dir())
