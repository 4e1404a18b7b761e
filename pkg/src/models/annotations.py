"""Per-frame annotation models shared by data I/O and evaluation."""
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from src.models.tracking import BBox
from src.utils.error_handlers import ContractError


class AnnotationRole(str, Enum):
    """Whether a frame's boxes are ground truth or tracker output."""

    GROUND_TRUTH = "ground_truth"
    PREDICTION = "prediction"


@dataclass(frozen=True)
class AnnotatedBox:
    """One identity-labelled box in one frame."""

    id: int
    box: BBox
    conf: float = 1.0
    visibility: float = 1.0


@dataclass
class FrameAnnotations:
    """All boxes of one frame, ids unique."""

    frame: int
    objects: list[AnnotatedBox] = field(default_factory=list)
    role: AnnotationRole = AnnotationRole.GROUND_TRUTH

    def __post_init__(self) -> None:
        ids = [obj.id for obj in self.objects]
        if len(ids) != len(set(ids)):
            raise ContractError(f"duplicate ids in frame {self.frame}", {"ids": ids})

    def ids(self) -> list[int]:
        return [obj.id for obj in self.objects]

    def by_id(self) -> dict[int, AnnotatedBox]:
        return {obj.id: obj for obj in self.objects}


@dataclass(frozen=True)
class MotRow:
    """One MOTChallenge text row, pixel units."""

    frame: int
    id: int
    left: float
    top: float
    width: float
    height: float
    conf: float = 1.0
    class_id: int = -1
    visibility: float = -1.0

    def to_line(self) -> str:
        return (
            f"{self.frame},{self.id},{self.left:.6f},{self.top:.6f},{self.width:.6f},{self.height:.6f},"
            f"{self.conf:.6f},{self.class_id},{self.visibility:g},-1"
        )

    def to_box(self, source_size: tuple[int, int]) -> BBox:
        """Convert to a normalized center-form box; ``source_size`` is (height, width)."""
        height, width = source_size
        return BBox(
            (self.left + self.width / 2.0) / width,
            (self.top + self.height / 2.0) / height,
            self.width / width,
            self.height / height,
        )

    @classmethod
    def from_box(
        cls, frame: int, track_id: int, box: BBox, source_size: tuple[int, int], conf: float = 1.0
    ) -> "MotRow":
        height, width = source_size
        return cls(
            frame=frame,
            id=track_id,
            left=box.left * width,
            top=box.top * height,
            width=box.w * width,
            height=box.h * height,
            conf=conf,
        )


@dataclass
class SequenceData:
    """One decoded sequence: frames [3,S,S] in [0,1] plus per-frame ground truth."""

    name: str
    frames: list[np.ndarray]
    annotations: dict[int, FrameAnnotations]
    source_size: tuple[int, int]

    @property
    def num_frames(self) -> int:
        return len(self.frames)

    def frame_annotations(self, frame: int) -> FrameAnnotations:
        return self.annotations.get(frame, FrameAnnotations(frame))
