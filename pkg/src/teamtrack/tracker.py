"""Sequence-level tracking driver.

Keeps track identities across frames: detections are matched to the
boxes of currently active tracks first, leftovers get a second pass
against inactive tracks so a briefly lost identity can be regained, and
whatever survives both passes may start a new track. A track that stays
unmatched for more than age_l consecutive frames is retired for good.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Sequence

from .association import Detection, RhConfig, plain_hungarian_associate, rally_hungarian
from .geometry import BBox
from .motio import FrameRecord

__all__ = ["Track", "TrackerConfig", "StepStats", "Tracker", "run_sequence"]


@dataclass
class Track:
    """One identity and its last known position.

    misses counts consecutive frames without a match; 0 means matched at
    the most recent processed frame (active), anything above means
    inactive but still revivable.
    """

    track_id: int
    box: BBox
    misses: int = 0
    prev_box: BBox | None = None


@dataclass(frozen=True)
class TrackerConfig:
    """Lifecycle and association settings.

    Attributes:
        age_l: consecutive unmatched frames a track survives; one more
            retires it.
        rh: lineup-matching settings; accept_threshold also gates the
            plain associator and the revival pass.
        use_rh: lineup substitution on or off (off = one-shot Hungarian
            over all detections).
        new_track_min_score: detections below this never spawn a track.
        constant_velocity: extrapolate each track box by its last step
            displacement instead of holding it still.
    """

    age_l: int = 80
    rh: RhConfig = RhConfig()
    use_rh: bool = True
    new_track_min_score: float = 0.4
    constant_velocity: bool = False

    def __post_init__(self) -> None:
        if self.age_l < 1:
            raise ValueError(f"age_l must be >= 1, got {self.age_l}")
        if not 0.0 <= self.new_track_min_score <= 1.0:
            raise ValueError(
                f"new_track_min_score must lie in [0, 1], got {self.new_track_min_score}"
            )


@dataclass(frozen=True)
class StepStats:
    """Association effort for one processed frame."""

    rally_iterations: int
    probes: int
    assoc_seconds: float
    matched: int


class Tracker:
    """Stateful per-sequence driver; one instance per sequence."""

    def __init__(self, cfg: TrackerConfig | None = None) -> None:
        self.cfg = cfg if cfg is not None else TrackerConfig()
        self.tracks: list[Track] = []
        self.next_id = 1
        self.frame_stats: list[StepStats] = []

    def _predicted(self, track: Track) -> BBox:
        if not self.cfg.constant_velocity or track.prev_box is None:
            return track.box
        dx = 0.5 * (track.box.x1 + track.box.x2 - track.prev_box.x1 - track.prev_box.x2)
        dy = 0.5 * (track.box.y1 + track.box.y2 - track.prev_box.y1 - track.prev_box.y2)
        return track.box.translate(dx, dy)

    def _mark_matched(self, track: Track, det: Detection) -> None:
        track.prev_box = track.box
        track.box = det.box
        track.misses = 0

    def step(self, detections: Sequence[Detection]) -> list[tuple[int, BBox]]:
        """Process one frame; returns the frame's active (id, box) pairs.

        An empty frame just ages every track.
        """
        cfg = self.cfg
        theta = cfg.rh.accept_threshold
        active = [t for t in self.tracks if t.misses == 0]
        inactive = [t for t in self.tracks if t.misses > 0]

        started = time.perf_counter()
        if cfg.use_rh:
            res = rally_hungarian(detections, [self._predicted(t) for t in active], cfg.rh)
        else:
            res = plain_hungarian_associate(
                detections, [self._predicted(t) for t in active], theta
            )
        assoc_seconds = time.perf_counter() - started

        matched_tracks: set[int] = set()
        matched_dets: set[int] = set()
        for det_idx, trk_idx, cost in res.matches:
            # the rally keeps over-threshold matches when the bench runs
            # dry; those pairs have no spatial support and stay unmatched
            if cost > theta:
                continue
            self._mark_matched(active[trk_idx], detections[det_idx])
            matched_tracks.add(trk_idx)
            matched_dets.add(det_idx)

        # only detections that were fielded at some point may revive or
        # spawn; with the plain associator the lineup is everyone
        fielded = set(res.final_lineup) | set(res.discarded)
        leftovers = sorted(fielded - matched_dets)

        revived: set[int] = set()
        spawn_pool = leftovers
        if leftovers and inactive:
            second = plain_hungarian_associate(
                [detections[i] for i in leftovers],
                [self._predicted(t) for t in inactive],
                theta,
            )
            for li, ii, _cost in second.matches:
                self._mark_matched(inactive[ii], detections[leftovers[li]])
                revived.add(ii)
            spawn_pool = [leftovers[li] for li in second.unmatched_detections]

        for idx, track in enumerate(active):
            if idx not in matched_tracks:
                track.misses += 1
        for idx, track in enumerate(inactive):
            if idx not in revived:
                track.misses += 1
        self.tracks = [t for t in self.tracks if t.misses <= cfg.age_l]

        for i in spawn_pool:
            if detections[i].score >= cfg.new_track_min_score:
                self.tracks.append(Track(self.next_id, detections[i].box))
                self.next_id += 1

        out = [(t.track_id, t.box) for t in self.tracks if t.misses == 0]
        self.frame_stats.append(
            StepStats(res.rally_iterations, res.probes, assoc_seconds, len(matched_dets))
        )
        return out


def run_sequence(
    frames: Sequence[Sequence[Detection]],
    cfg: TrackerConfig | None = None,
    tracker: Tracker | None = None,
) -> list[FrameRecord]:
    """Track a whole sequence and return MOT-style records, frames 1-based.

    Pass a tracker to keep access to its per-frame stats afterwards;
    otherwise a fresh one is built from cfg.
    """
    if tracker is None:
        tracker = Tracker(cfg)
    records: list[FrameRecord] = []
    for frame_no, detections in enumerate(frames, start=1):
        for track_id, box in tracker.step(detections):
            records.append(
                FrameRecord(
                    frame=frame_no,
                    track_id=track_id,
                    x=box.x1,
                    y=box.y1,
                    w=box.width,
                    h=box.height,
                )
            )
    return records
