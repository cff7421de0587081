"""MOT CSV parsing, rendering, and frame grouping."""

from __future__ import annotations

import io

import numpy as np
import pytest

from teamtrack import FrameRecord, MotFormatError, group_by_frame, parse_mot_csv, write_mot_csv


def test_full_line_maps_fields_in_order() -> None:
    (record,) = parse_mot_csv("1,7,10,20,30,40,1,1,1")
    assert record == FrameRecord(frame=1, track_id=7, x=10.0, y=20.0, w=30.0, h=40.0)
    assert record.to_bbox().as_tuple() == (10.0, 20.0, 40.0, 60.0)


def test_trailing_fields_default_to_one() -> None:
    (record,) = parse_mot_csv("1,-1,0,0,5,5,0.9")
    assert record.track_id == -1
    assert record.conf == 0.9
    assert record.class_id == 1 and record.visibility == 1.0
    (bare,) = parse_mot_csv("3,2,0,0,5,5")
    assert bare.conf == 1.0


def test_world_coordinate_columns_are_ignored() -> None:
    (record,) = parse_mot_csv("1,2,0,0,5,5,1,1,1,-3.1,7.2,0.4")
    assert record == FrameRecord(frame=1, track_id=2, x=0.0, y=0.0, w=5.0, h=5.0)
    assert write_mot_csv([record]).strip().count(",") == 8


def test_empty_and_blank_input() -> None:
    assert parse_mot_csv("") == []
    assert parse_mot_csv("\n  \n\n") == []


def test_blank_lines_are_skipped_but_still_numbered() -> None:
    text = "1,1,0,0,5,5\n\n0,1,0,0,5,5\n"
    with pytest.raises(MotFormatError) as info:
        parse_mot_csv(text)
    assert info.value.line_no == 3
    assert "line 3:" in str(info.value)


def test_crlf_endings_are_tolerated() -> None:
    records = parse_mot_csv("1,1,0,0,5,5\r\n2,1,0,0,5,5\r\n")
    assert [r.frame for r in records] == [1, 2]


def test_reads_from_a_text_object() -> None:
    records = parse_mot_csv(io.StringIO("1,1,0,0,5,5\n2,1,4,4,5,5\n"))
    assert len(records) == 2


@pytest.mark.parametrize(
    "line, fragment",
    [
        ("1,1,0,0,5", "at least 6 fields"),
        ("1,1,0,0,five,5", "five"),
        ("0,1,0,0,5,5", "frame"),
        ("1,1,0,0,0,5", "size"),
        ("1,1,0,0,5,-2", "size"),
    ],
)
def test_bad_lines_raise_with_the_line_number(line: str, fragment: str) -> None:
    with pytest.raises(MotFormatError) as info:
        parse_mot_csv("5,1,0,0,5,5\n" + line)
    assert info.value.line_no == 2
    assert fragment in str(info.value)


def test_written_coordinates_trim_to_two_decimals() -> None:
    record = FrameRecord(frame=2, track_id=3, x=3.75, y=2.0, w=0.5, h=10.0, conf=0.9)
    assert write_mot_csv([record]) == "2,3,3.75,2,0.5,10,0.9,1,1\n"
    integral = FrameRecord(frame=1, track_id=1, x=-0.0, y=0.0, w=12.0, h=7.0)
    assert write_mot_csv([integral]) == "1,1,0,0,12,7,1,1,1\n"


def test_round_trip_is_the_identity_on_conforming_records() -> None:
    rng = np.random.default_rng(17)
    for _ in range(25):
        records = []
        for _i in range(40):
            w = round(float(rng.uniform(0.5, 80.0)), 2)
            h = round(float(rng.uniform(0.5, 80.0)), 2)
            records.append(
                FrameRecord(
                    frame=int(rng.integers(1, 500)),
                    track_id=int(rng.choice([-1, int(rng.integers(1, 50))])),
                    x=round(float(rng.uniform(-100.0, 900.0)), 2),
                    y=round(float(rng.uniform(-100.0, 500.0)), 2),
                    w=max(w, 0.01),
                    h=max(h, 0.01),
                    conf=float(rng.uniform(0.0, 1.0)),
                    class_id=int(rng.integers(1, 12)),
                    visibility=float(rng.uniform(0.0, 1.0)),
                )
            )
        assert parse_mot_csv(write_mot_csv(records)) == records


def test_records_parse_in_file_order() -> None:
    text = "2,1,0,0,5,5\n1,9,0,0,5,5\n1,2,0,0,5,5\n"
    records = parse_mot_csv(text)
    assert [(r.frame, r.track_id) for r in records] == [(2, 1), (1, 9), (1, 2)]


def test_group_by_frame_is_dense_to_the_maximum() -> None:
    records = parse_mot_csv("1,1,0,0,5,5\n3,1,0,0,5,5\n1,2,0,0,5,5\n")
    groups = group_by_frame(records)
    assert len(groups) == 3
    assert [r.track_id for r in groups[0]] == [1, 2]
    assert groups[1] == []
    assert [r.track_id for r in groups[2]] == [1]
    assert group_by_frame([]) == []


def test_record_validation() -> None:
    with pytest.raises(ValueError):
        FrameRecord(frame=0, track_id=1, x=0.0, y=0.0, w=5.0, h=5.0)
    with pytest.raises(ValueError):
        FrameRecord(frame=1, track_id=1, x=0.0, y=0.0, w=0.0, h=5.0)
    with pytest.raises(ValueError):
        FrameRecord(frame=1, track_id=1, x=float("nan"), y=0.0, w=5.0, h=5.0)
    with pytest.raises(ValueError):
        FrameRecord(frame=1, track_id=1, x=0.0, y=0.0, w=5.0, h=float("inf"))
