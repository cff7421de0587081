"""MOT-style CSV reading and writing.

One record per line: frame, id, x, y, w, h, conf, class, visibility.
The three trailing fields may be omitted on read and default to 1; any
fields past the ninth (world coordinates in some files) are ignored and
never written back.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, TextIO

from .geometry import BBox

__all__ = [
    "MotFormatError",
    "FrameRecord",
    "parse_mot_csv",
    "write_mot_csv",
    "group_by_frame",
]


class MotFormatError(ValueError):
    """A line that cannot be read as a record; carries its line number."""

    def __init__(self, line_no: int, message: str) -> None:
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class FrameRecord:
    """One annotated box: top-left corner plus size, 1-based frame number.

    track_id is -1 for raw detections that carry no identity yet.
    """

    frame: int
    track_id: int
    x: float
    y: float
    w: float
    h: float
    conf: float = 1.0
    class_id: int = 1
    visibility: float = 1.0

    def __post_init__(self) -> None:
        if self.frame < 1:
            raise ValueError(f"frame must be >= 1, got {self.frame}")
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box size must be positive, got w={self.w}, h={self.h}")
        for name in ("x", "y", "w", "h", "conf", "visibility"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def to_bbox(self) -> BBox:
        return BBox(self.x, self.y, self.x + self.w, self.y + self.h)


def parse_mot_csv(source: str | TextIO) -> list[FrameRecord]:
    """Read records in file order; no re-sorting.

    Accepts a string or a readable text object. Blank lines are skipped.
    Raises MotFormatError, with the offending 1-based line number, for
    lines with fewer than six fields, non-numeric fields, frame < 1, or
    non-positive box size.
    """
    text = source.read() if hasattr(source, "read") else source
    records: list[FrameRecord] = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        fields = line.split(",")
        if len(fields) < 6:
            raise MotFormatError(line_no, f"expected at least 6 fields, got {len(fields)}")
        try:
            record = FrameRecord(
                frame=int(fields[0]),
                track_id=int(fields[1]),
                x=float(fields[2]),
                y=float(fields[3]),
                w=float(fields[4]),
                h=float(fields[5]),
                conf=float(fields[6]) if len(fields) > 6 else 1.0,
                class_id=int(fields[7]) if len(fields) > 7 else 1,
                visibility=float(fields[8]) if len(fields) > 8 else 1.0,
            )
        except ValueError as exc:
            raise MotFormatError(line_no, str(exc)) from exc
        records.append(record)
    return records


def _coord(v: float) -> str:
    # two decimal places, trailing zeros trimmed
    s = f"{v:.2f}".rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


def _scalar(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def write_mot_csv(records: Iterable[FrameRecord]) -> str:
    """Render records as CSV text, one 9-field line each, LF endings.

    Coordinates are written with at most two decimal places; conf and
    visibility keep full precision so parse(write(r)) == r whenever the
    coordinates already fit two decimals.
    """
    lines = []
    for r in records:
        lines.append(
            ",".join(
                (
                    str(r.frame),
                    str(r.track_id),
                    _coord(r.x),
                    _coord(r.y),
                    _coord(r.w),
                    _coord(r.h),
                    _scalar(r.conf),
                    str(r.class_id),
                    _scalar(r.visibility),
                )
            )
        )
    return "".join(line + "\n" for line in lines)


def group_by_frame(records: Sequence[FrameRecord]) -> list[list[FrameRecord]]:
    """Bucket records by frame, dense from frame 1 to the maximum seen.

    Frames with no records yield empty lists; order within a frame is
    input order. Empty input gives an empty list.
    """
    if not records:
        return []
    groups: list[list[FrameRecord]] = [[] for _ in range(max(r.frame for r in records))]
    for r in records:
        groups[r.frame - 1].append(r)
    return groups
