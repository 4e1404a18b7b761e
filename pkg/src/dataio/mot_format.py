"""MOTChallenge text rows: ``frame,id,left,top,width,height,conf,class,visibility[,unused]``."""
import logging
from collections.abc import Iterable

from src.models.annotations import AnnotatedBox, AnnotationRole, FrameAnnotations, MotRow
from src.utils.error_handlers import MotParseError

logger = logging.getLogger(__name__)

MIN_FIELDS = 6
MAX_FIELDS = 10


def parse_row(line: str, line_number: int) -> MotRow:
    """Parse one comma-separated row; missing trailing fields take MOTChallenge defaults."""
    fields = [f.strip() for f in line.split(",")]
    if not MIN_FIELDS <= len(fields) <= MAX_FIELDS:
        raise MotParseError(line_number, line, f"expected {MIN_FIELDS}-{MAX_FIELDS} fields, got {len(fields)}")
    try:
        frame_value, id_value = float(fields[0]), float(fields[1])
        left, top, width, height = (float(v) for v in fields[2:6])
        conf = float(fields[6]) if len(fields) > 6 else 1.0
        class_id = int(float(fields[7])) if len(fields) > 7 else -1
        visibility = float(fields[8]) if len(fields) > 8 else -1.0
    except ValueError as e:
        raise MotParseError(line_number, line, f"non-numeric field ({e})") from e
    if not (frame_value.is_integer() and id_value.is_integer()):
        raise MotParseError(line_number, line, "frame and id must be integers")
    if int(frame_value) < 1:
        raise MotParseError(line_number, line, "frame numbers start at 1")
    return MotRow(int(frame_value), int(id_value), left, top, width, height, conf, class_id, visibility)


def parse_mot(
    text: str,
    source_size: tuple[int, int],
    role: AnnotationRole = AnnotationRole.GROUND_TRUTH,
) -> dict[int, FrameAnnotations]:
    """Group rows by frame as normalized center-form boxes.

    ``source_size`` is the (height, width) the pixel coordinates refer to.
    Ground-truth rows with conf 0 are ignored.
    """
    grouped: dict[int, list[AnnotatedBox]] = {}
    seen: set[tuple[int, int]] = set()
    ignored = 0
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        row = parse_row(line, line_number)
        if role == AnnotationRole.GROUND_TRUTH and row.conf == 0:
            ignored += 1
            continue
        if row.width <= 0 or row.height <= 0:
            raise MotParseError(line_number, line, "width and height must be positive")
        if (row.frame, row.id) in seen:
            raise MotParseError(line_number, line, f"id {row.id} appears twice in frame {row.frame}")
        seen.add((row.frame, row.id))
        visibility = row.visibility if row.visibility >= 0 else 1.0
        grouped.setdefault(row.frame, []).append(
            AnnotatedBox(row.id, row.to_box(source_size), conf=row.conf, visibility=visibility)
        )
    if ignored:
        logger.debug(f"Ignored {ignored} ground-truth row(s) with conf 0")
    return {frame: FrameAnnotations(frame, objects, role) for frame, objects in sorted(grouped.items())}


def _rows(frames: Iterable[FrameAnnotations], source_size: tuple[int, int], ground_truth: bool) -> list[MotRow]:
    rows = []
    for frame in frames:
        for obj in frame.objects:
            row = MotRow.from_box(frame.frame, obj.id, obj.box, source_size, conf=obj.conf)
            if ground_truth:
                row = MotRow(row.frame, row.id, row.left, row.top, row.width, row.height, 1.0, 1, obj.visibility)
            rows.append(row)
    return sorted(rows, key=lambda r: (r.frame, r.id))


def write_results(frames: Iterable[FrameAnnotations], source_size: tuple[int, int]) -> str:
    """Tracker output as MOTChallenge result rows sorted by (frame, id); conf is the track score."""
    rows = _rows(frames, source_size, ground_truth=False)
    return "".join(row.to_line() + "\n" for row in rows)


def write_ground_truth(frames: Iterable[FrameAnnotations], source_size: tuple[int, int]) -> str:
    """Ground truth rows with conf 1, class 1 and the object's visibility."""
    rows = _rows(frames, source_size, ground_truth=True)
    return "".join(row.to_line() + "\n" for row in rows)

