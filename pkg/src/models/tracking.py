"""Box, detection and track models."""
from dataclasses import dataclass, field
from enum import Enum

from src.utils.error_handlers import ContractError


@dataclass(frozen=True)
class BBox:
    """Axis-aligned box in normalized image fractions (center form)."""

    cx: float
    cy: float
    w: float
    h: float

    def __post_init__(self) -> None:
        if not (self.w > 0 and self.h > 0):
            raise ContractError("box width and height must be positive", {"w": self.w, "h": self.h})

    @classmethod
    def from_corners(cls, left: float, top: float, right: float, bottom: float) -> "BBox":
        return cls((left + right) / 2.0, (top + bottom) / 2.0, right - left, bottom - top)

    @property
    def left(self) -> float:
        return self.cx - self.w / 2.0

    @property
    def top(self) -> float:
        return self.cy - self.h / 2.0

    @property
    def right(self) -> float:
        return self.cx + self.w / 2.0

    @property
    def bottom(self) -> float:
        return self.cy + self.h / 2.0

    @property
    def area(self) -> float:
        return self.w * self.h

    def shifted(self, dx: float, dy: float) -> "BBox":
        return BBox(self.cx + dx, self.cy + dy, self.w, self.h)


@dataclass(frozen=True)
class Detection:
    """Decoded box with its heatmap score and de-normalized displacement."""

    box: BBox
    score: float
    disp: tuple[float, float] = (0.0, 0.0)


class TrackState(str, Enum):
    """Track lifecycle state."""

    ACTIVE = "active"
    LOST = "lost"


@dataclass
class Track:
    """Identity-bearing trajectory."""

    id: int
    last_box: BBox
    state: TrackState = TrackState.ACTIVE
    lost_age: int = 0
    score: float = 1.0
    history: list[tuple[int, BBox]] = field(default_factory=list)

    def mark_matched(self, frame_index: int, detection: Detection) -> None:
        self.last_box = detection.box
        self.score = detection.score
        self.state = TrackState.ACTIVE
        self.lost_age = 0
        self.history.append((frame_index, detection.box))

    def mark_missed(self) -> None:
        self.state = TrackState.LOST
        self.lost_age += 1
