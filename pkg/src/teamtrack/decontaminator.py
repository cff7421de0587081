"""Duplicate-detection cleanup over one frame's boxes.

A duplicate is a second detection sitting nearly on top of another one,
which shows up as a near-zero entry in the frame's pairwise GIoU-loss
matrix. This module builds that matrix, reports pairs under a lower
bound, scores them as a penalty, differentiates the penalty, and can
either push offending boxes apart by gradient descent or simply drop the
weaker member of each pair.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geometry import BBox, BoxGrad, _giou_loss_grad4, array_to_boxes, boxes_to_array, pairwise_giou_loss

__all__ = [
    "MODES",
    "DecontaminatorConfig",
    "self_giou_matrix",
    "detect_duplicates",
    "duplicate_loss",
    "total_boxes_loss",
    "duplicate_loss_grad",
    "decontaminate",
    "suppress_duplicates",
]

MODES = ("literal", "repulsive")


@dataclass(frozen=True)
class DecontaminatorConfig:
    """Duplicate-penalty settings.

    Attributes:
        lower_bound: a pairwise giou_loss strictly below this flags the
            pair as duplicates.
        mode: "literal" sums the offending losses themselves; "repulsive"
            sums the hinge gaps (lower_bound - loss), whose gradient
            drives the pair apart.
    """

    lower_bound: float = 0.011
    mode: str = "literal"

    def __post_init__(self) -> None:
        if not 0.0 < self.lower_bound < 2.0:
            raise ValueError(f"lower_bound must lie in (0, 2), got {self.lower_bound}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")


def _matrix_from_array(arr: np.ndarray) -> np.ndarray:
    m = pairwise_giou_loss(arr, arr)
    np.fill_diagonal(m, 0.0)
    return m


def self_giou_matrix(boxes: Sequence[BBox]) -> np.ndarray:
    """Pairwise giou_loss over one frame; symmetric with a zero diagonal.

    Args:
        boxes: at least one valid box.

    Returns:
        (n, n) array with entry (i, j) = giou_loss(boxes[i], boxes[j]).
    """
    if len(boxes) == 0:
        raise ValueError("need at least one box")
    return _matrix_from_array(boxes_to_array(boxes))


def detect_duplicates(m: np.ndarray, cfg: DecontaminatorConfig) -> list[tuple[int, int, float]]:
    """List (i, j, loss) for strict upper-triangle entries under the bound.

    Sorted ascending by loss then by indices, so the tightest pair comes
    first. The diagonal never qualifies.
    """
    m = np.asarray(m, dtype=float)
    iu, ju = np.triu_indices(m.shape[0], k=1)
    vals = m[iu, ju]
    hit = vals < cfg.lower_bound
    ranked = sorted(zip(vals[hit], iu[hit], ju[hit]))
    return [(int(i), int(j), float(v)) for v, i, j in ranked]


def duplicate_loss(m: np.ndarray, cfg: DecontaminatorConfig) -> float:
    """Total duplicate penalty over the matrix.

    Off-diagonal entries below the bound contribute; the sum is halved
    because the matrix holds each pair twice. Literal mode sums the
    losses themselves, repulsive mode their gaps to the bound.
    """
    m = np.asarray(m, dtype=float)
    active = m < cfg.lower_bound
    np.fill_diagonal(active, False)
    if cfg.mode == "literal":
        return 0.5 * float(m[active].sum())
    return 0.5 * float((cfg.lower_bound - m[active]).sum())


def total_boxes_loss(origin_loss: float, m: np.ndarray, cfg: DecontaminatorConfig) -> float:
    """Box regression loss plus the duplicate penalty."""
    if not np.isfinite(origin_loss):
        raise ValueError(f"origin_loss must be finite, got {origin_loss}")
    return float(origin_loss) + duplicate_loss(m, cfg)


def _grad_from_array(arr: np.ndarray, cfg: DecontaminatorConfig) -> np.ndarray:
    m = _matrix_from_array(arr)
    sign = 1.0 if cfg.mode == "literal" else -1.0
    g = np.zeros((arr.shape[0], 4))
    iu, ju = np.triu_indices(arr.shape[0], k=1)
    for i, j in zip(iu, ju):
        if m[i, j] < cfg.lower_bound:
            ga, gb = _giou_loss_grad4(arr[i], arr[j])
            g[i] += np.multiply(ga, sign)
            g[j] += np.multiply(gb, sign)
    return g


def duplicate_loss_grad(boxes: Sequence[BBox], cfg: DecontaminatorConfig) -> list[BoxGrad]:
    """Gradient of duplicate_loss with respect to every box coordinate.

    Boxes not in any below-bound pair get an all-zero gradient.
    """
    g = _grad_from_array(boxes_to_array(boxes), cfg)
    return [BoxGrad(*map(float, row)) for row in g]


def _valid_row(row: np.ndarray) -> bool:
    return bool(row[2] > row[0] and row[3] > row[1])


def decontaminate(
    boxes: Sequence[BBox],
    cfg: DecontaminatorConfig,
    step_size: float = 0.5,
    max_steps: int = 500,
) -> tuple[list[BBox], int]:
    """Push duplicate boxes apart by descending the repulsive penalty.

    Iterates gradient steps until no pair sits under the lower bound or
    the step budget runs out. A step that would squash a box to
    non-positive extent is retried at half length for that box, which is
    expected behavior rather than an error.

    Args:
        boxes: frame boxes to adjust.
        cfg: must have mode "repulsive"; the literal penalty's gradient
            pulls duplicates together instead of apart.
        step_size: descent step in pixels per unit gradient.
        max_steps: iteration budget.

    Returns:
        (adjusted boxes, steps taken). steps < max_steps means every
        pairwise loss ended at or above the bound.
    """
    if cfg.mode != "repulsive":
        raise ValueError("decontaminate requires repulsive mode")
    if step_size <= 0.0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    if max_steps < 0:
        raise ValueError(f"max_steps must be >= 0, got {max_steps}")
    arr = boxes_to_array(boxes)
    steps = 0
    while steps < max_steps:
        m = _matrix_from_array(arr)
        active = m < cfg.lower_bound
        np.fill_diagonal(active, False)
        if not active.any():
            break
        g = _grad_from_array(arr, cfg)
        steps += 1
        for idx in np.flatnonzero(np.any(g != 0.0, axis=1)):
            s = step_size
            cand = arr[idx] - s * g[idx]
            while not _valid_row(cand):
                s *= 0.5
                cand = arr[idx] - s * g[idx]
            arr[idx] = cand
    return array_to_boxes(arr), steps


def suppress_duplicates(detections: Sequence, lower_bound: float) -> list:
    """Drop the lower-scoring member of every duplicate detection pair.

    Pairs are processed tightest first; a detection that was already
    dropped no longer eliminates others. Score ties keep the earlier
    detection. Input order is preserved in the result.

    Args:
        detections: objects with .box and .score (association.Detection).
        lower_bound: duplicate threshold on pairwise giou_loss.

    Returns:
        The surviving detections, a subset of the input.
    """
    if len(detections) < 2:
        return list(detections)
    m = _matrix_from_array(boxes_to_array([d.box for d in detections]))
    cfg = DecontaminatorConfig(lower_bound=lower_bound, mode="literal")
    dropped: set[int] = set()
    for i, j, _ in detect_duplicates(m, cfg):
        if i in dropped or j in dropped:
            continue
        dropped.add(j if detections[i].score >= detections[j].score else i)
    return [d for k, d in enumerate(detections) if k not in dropped]
