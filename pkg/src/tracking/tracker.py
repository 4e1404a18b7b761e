"""Identity maintenance across frames."""
import logging

from src.config.run_config import AssocConfig
from src.models.annotations import AnnotatedBox, AnnotationRole, FrameAnnotations
from src.models.tracking import Detection, Track, TrackState
from src.tracking.assignment import build_cost, hungarian
from src.utils.error_handlers import ContractError

logger = logging.getLogger(__name__)


class Tracker:
    """Active/lost/terminated lifecycle over Hungarian-associated detections.

    Lost tracks stay matchable until they have been missed for more than
    ``max_lost`` consecutive frames. Ids start at 1 and are never reused.
    """

    def __init__(self, cfg: AssocConfig):
        self.cfg = cfg
        self.tracks: list[Track] = []
        self.next_id = 1
        self.last_frame: int | None = None
        self.terminated = 0

    def step(self, detections: list[Detection], frame_index: int) -> FrameAnnotations:
        """Associate one frame's detections; returns the rows for matched and newly created tracks."""
        if self.last_frame is not None and frame_index <= self.last_frame:
            raise ContractError(
                f"frame {frame_index} presented after frame {self.last_frame}",
                {"frame_index": frame_index, "last_frame": self.last_frame},
            )
        self.last_frame = frame_index

        pairs = hungarian(build_cost(detections, self.tracks, self.cfg)) if detections and self.tracks else []
        matched_dets = {d for d, _ in pairs}
        matched_tracks = {t for _, t in pairs}
        emitted: list[Track] = []

        for d, t in pairs:
            track = self.tracks[t]
            track.mark_matched(frame_index, detections[d])
            emitted.append(track)

        survivors: list[Track] = []
        for index, track in enumerate(self.tracks):
            if index not in matched_tracks:
                track.mark_missed()
                if track.lost_age > self.cfg.max_lost:
                    self.terminated += 1
                    logger.debug(f"Terminated track {track.id} at frame {frame_index}")
                    continue
            survivors.append(track)

        for d, det in enumerate(detections):
            if d in matched_dets:
                continue
            track = Track(id=self.next_id, last_box=det.box, score=det.score)
            track.history.append((frame_index, det.box))
            self.next_id += 1
            survivors.append(track)
            emitted.append(track)
        self.tracks = survivors

        rows = [AnnotatedBox(track.id, track.last_box, conf=track.score) for track in sorted(emitted, key=lambda t: t.id)]
        return FrameAnnotations(frame_index, rows, AnnotationRole.PREDICTION)

    @property
    def active(self) -> list[Track]:
        return [t for t in self.tracks if t.state == TrackState.ACTIVE]

    @property
    def lost(self) -> list[Track]:
        return [t for t in self.tracks if t.state == TrackState.LOST]
