"""Seeded synthetic scenarios: court-bounded trajectories plus a
detection corruption model (misses, jitter, near-coincident duplicate
boxes with their own score range). Stands in for real footage in tests
and benchmarks; everything is a pure function of the config.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .association import Detection
from .geometry import BBox, giou_loss
from .motio import FrameRecord

__all__ = ["RNG_NAME", "ScenarioConfig", "generate"]

# recorded in scenario manifests so outputs stay reproducible elsewhere
RNG_NAME = "numpy-pcg64"

# chance per frame that an athlete abruptly changes direction
_TURN_PROBABILITY = 0.05

# a duplicate must stay this close (giou_loss) to its source box
_DUPLICATE_LOSS_CAP = 0.2


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario shape and corruption levels.

    All rates are per ground-truth box per frame. Defaults produce an
    uncorrupted sequence: detections identical to ground truth. The two
    score ranges overlap on purpose: confidence alone cannot separate
    duplicates from real boxes, same as detector output in the wild.
    """

    seed: int
    athletes: int = 12
    frames: int = 800
    arena: tuple[float, float] = (960.0, 540.0)
    box_size: tuple[float, float] = (40.0, 80.0)
    speed_max: float = 6.0
    duplicate_rate: float = 0.0
    duplicate_offset_max: float = 2.0
    miss_rate: float = 0.0
    jitter_sigma: float = 0.0
    score_true_range: tuple[float, float] = (0.60, 0.99)
    score_dup_range: tuple[float, float] = (0.45, 0.90)

    def __post_init__(self) -> None:
        if self.athletes < 1:
            raise ValueError(f"athletes must be >= 1, got {self.athletes}")
        if self.frames < 1:
            raise ValueError(f"frames must be >= 1, got {self.frames}")
        for name in ("duplicate_rate", "miss_rate"):
            rate = getattr(self, name)
            if not 0.0 <= rate <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {rate}")
        if self.speed_max <= 0:
            raise ValueError(f"speed_max must be positive, got {self.speed_max}")
        if self.jitter_sigma < 0:
            raise ValueError(f"jitter_sigma must be >= 0, got {self.jitter_sigma}")
        if self.duplicate_offset_max < 0:
            raise ValueError(
                f"duplicate_offset_max must be >= 0, got {self.duplicate_offset_max}"
            )
        bw, bh = self.box_size
        aw, ah = self.arena
        if bw <= 0 or bh <= 0:
            raise ValueError(f"box_size must be positive, got {self.box_size}")
        if bw > aw or bh > ah:
            raise ValueError(f"box {self.box_size} does not fit arena {self.arena}")
        for name in ("score_true_range", "score_dup_range"):
            lo, hi = getattr(self, name)
            if not 0.0 <= lo <= hi <= 1.0:
                raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= 1, got {(lo, hi)}")
        # a clone shifted by the worst-case offset must still read as a
        # duplicate of its source, with margin
        d = self.duplicate_offset_max
        worst = giou_loss(BBox(0, 0, bw, bh), BBox(d, d, bw + d, bh + d))
        if worst >= _DUPLICATE_LOSS_CAP:
            raise ValueError(
                f"duplicate_offset_max {d} puts clone loss at {worst:.3f}, "
                f"over the {_DUPLICATE_LOSS_CAP} cap for box_size {self.box_size}"
            )


def _shift_into(x1: float, y1: float, cfg: ScenarioConfig) -> tuple[float, float]:
    # translate a box's corner so the box lies inside the arena
    bw, bh = cfg.box_size
    aw, ah = cfg.arena
    return min(max(x1, 0.0), aw - bw), min(max(y1, 0.0), ah - bh)


def generate(cfg: ScenarioConfig) -> tuple[list[FrameRecord], list[list[Detection]]]:
    """Build one scenario: ground-truth records and per-frame detections.

    Athletes move piecewise-linearly, reflecting off the arena walls and
    occasionally resampling direction. Every ground-truth box is then
    independently dropped, jittered, and possibly cloned at a small
    offset; clones get the lower score range. Same config, same output.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    n = cfg.athletes
    bw, bh = cfg.box_size
    aw, ah = cfg.arena
    lo = np.array([bw / 2.0, bh / 2.0])
    hi = np.array([aw - bw / 2.0, ah - bh / 2.0])

    center = rng.uniform(lo, hi, size=(n, 2))
    angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
    speed = rng.uniform(0.0, cfg.speed_max, size=n)
    velocity = np.stack([speed * np.cos(angle), speed * np.sin(angle)], axis=1)

    ground_truth: list[FrameRecord] = []
    det_frames: list[list[Detection]] = []
    for frame in range(1, cfg.frames + 1):
        turn = rng.random(n) < _TURN_PROBABILITY
        new_angle = rng.uniform(0.0, 2.0 * math.pi, size=n)
        if turn.any():
            velocity[turn, 0] = speed[turn] * np.cos(new_angle[turn])
            velocity[turn, 1] = speed[turn] * np.sin(new_angle[turn])
        center += velocity
        for axis in range(2):
            below = center[:, axis] < lo[axis]
            center[below, axis] = 2.0 * lo[axis] - center[below, axis]
            above = center[:, axis] > hi[axis]
            center[above, axis] = 2.0 * hi[axis] - center[above, axis]
            flip = below | above
            velocity[flip, axis] = -velocity[flip, axis]
        # one reflection suffices: per-frame displacement is far smaller
        # than the arena, but clip defensively against extreme configs
        np.clip(center, lo, hi, out=center)

        missed = rng.random(n) < cfg.miss_rate
        jitter = rng.normal(0.0, cfg.jitter_sigma, size=(n, 2)) if cfg.jitter_sigma else np.zeros((n, 2))
        cloned = rng.random(n) < cfg.duplicate_rate
        offset = rng.uniform(-cfg.duplicate_offset_max, cfg.duplicate_offset_max, size=(n, 2))
        score_true = rng.uniform(*cfg.score_true_range, size=n)
        score_dup = rng.uniform(*cfg.score_dup_range, size=n)

        detections: list[Detection] = []
        for i in range(n):
            x1 = center[i, 0] - bw / 2.0
            y1 = center[i, 1] - bh / 2.0
            ground_truth.append(FrameRecord(frame, i + 1, x1, y1, bw, bh))
            if missed[i]:
                continue
            dx, dy = _shift_into(x1 + jitter[i, 0], y1 + jitter[i, 1], cfg)
            detections.append(Detection(BBox(dx, dy, dx + bw, dy + bh), float(score_true[i])))
            if cloned[i]:
                cx, cy = _shift_into(dx + offset[i, 0], dy + offset[i, 1], cfg)
                detections.append(Detection(BBox(cx, cy, cx + bw, cy + bh), float(score_dup[i])))
        det_frames.append(detections)
    return ground_truth, det_frames
