"""Models package."""
from .annotations import AnnotatedBox, AnnotationRole, FrameAnnotations, MotRow
from .reports import EvalReport, FrameDiagnostics, PhaseReport, TrainReport
from .tracking import BBox, Detection, Track, TrackState

__all__ = [
    "AnnotatedBox",
    "AnnotationRole",
    "BBox",
    "Detection",
    "EvalReport",
    "FrameAnnotations",
    "FrameDiagnostics",
    "MotRow",
    "PhaseReport",
    "Track",
    "TrackState",
    "TrainReport",
]
