"""Axis-aligned bounding-box arithmetic.

Boxes are corner-form rectangles: (x1, y1) top-left, (x2, y2) bottom-right,
in pixel coordinates. The overlap measures here are the generalized-IoU
family: plain IoU, the smallest enclosing box, GIoU, the GIoU loss
(1 - GIoU) and its analytic subgradient. Scalar functions take BBox values;
the pairwise_* helpers take (N, 4) float arrays and are the fast path for
building cost matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "InvalidBoxError",
    "BBox",
    "BoxGrad",
    "iou",
    "enclosing_box",
    "giou",
    "giou_loss",
    "giou_loss_grad",
    "pairwise_iou",
    "pairwise_giou_loss",
    "boxes_to_array",
    "array_to_boxes",
]


class InvalidBoxError(ValueError):
    """Raised for boxes with non-positive extent or non-finite coordinates."""


@dataclass(frozen=True)
class BBox:
    """Rectangle with strictly positive width and height.

    Attributes:
        x1: left edge, pixels.
        y1: top edge, pixels.
        x2: right edge, pixels; must exceed x1.
        y2: bottom edge, pixels; must exceed y1.
    """

    x1: float
    y1: float
    x2: float
    y2: float

    def __post_init__(self) -> None:
        coords = (self.x1, self.y1, self.x2, self.y2)
        if not all(math.isfinite(c) for c in coords):
            raise InvalidBoxError(f"non-finite coordinate in {coords}")
        if self.x2 <= self.x1 or self.y2 <= self.y1:
            raise InvalidBoxError(f"degenerate box {coords}")

    @property
    def width(self) -> float:
        return self.x2 - self.x1

    @property
    def height(self) -> float:
        return self.y2 - self.y1

    @property
    def area(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1)

    def translate(self, dx: float, dy: float) -> "BBox":
        return BBox(self.x1 + dx, self.y1 + dy, self.x2 + dx, self.y2 + dy)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.x1, self.y1, self.x2, self.y2)

    @staticmethod
    def from_xywh(x: float, y: float, w: float, h: float) -> "BBox":
        """Build from top-left corner plus width and height."""
        return BBox(x, y, x + w, y + h)


@dataclass(frozen=True)
class BoxGrad:
    """Partial derivatives of a scalar loss w.r.t. one box's coordinates."""

    d_x1: float
    d_y1: float
    d_x2: float
    d_y2: float

    def as_array(self) -> np.ndarray:
        return np.array([self.d_x1, self.d_y1, self.d_x2, self.d_y2])


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union.

    Args:
        a: first box.
        b: second box.

    Returns:
        area(a & b) / area(a | b), in [0, 1].
    """
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    if iw <= 0.0 or ih <= 0.0:
        return 0.0
    inter = iw * ih
    return inter / (a.area + b.area - inter)


def enclosing_box(a: BBox, b: BBox) -> BBox:
    """Smallest axis-aligned box containing both inputs."""
    return BBox(
        min(a.x1, b.x1),
        min(a.y1, b.y1),
        max(a.x2, b.x2),
        max(a.y2, b.y2),
    )


def giou(a: BBox, b: BBox) -> float:
    """Generalized IoU.

    The plain IoU minus the fraction of the smallest enclosing box not
    covered by the union, giving a similarity in (-1, 1] that stays
    informative for disjoint boxes.
    """
    iw = min(a.x2, b.x2) - max(a.x1, b.x1)
    ih = min(a.y2, b.y2) - max(a.y1, b.y1)
    inter = iw * ih if (iw > 0.0 and ih > 0.0) else 0.0
    union = a.area + b.area - inter
    cw = max(a.x2, b.x2) - min(a.x1, b.x1)
    ch = max(a.y2, b.y2) - min(a.y1, b.y1)
    c_area = cw * ch
    return inter / union - (c_area - union) / c_area


def giou_loss(a: BBox, b: BBox) -> float:
    """1 - giou(a, b), in [0, 2); zero exactly when the boxes coincide."""
    return 1.0 - giou(a, b)


def giou_loss_grad(a: BBox, b: BBox) -> tuple[BoxGrad, BoxGrad]:
    """Analytic subgradient of giou_loss with respect to both boxes.

    The loss is piecewise smooth. At ties of its min/max terms the
    subgradient treats min and max as selecting their first argument
    (the `a` box), and the intersection-width clamp contributes zero
    slope exactly at zero, so the result is deterministic everywhere.

    Returns:
        (grad_a, grad_b), each holding d(giou_loss)/d(coordinate).
    """
    ga, gb = _giou_loss_grad4(a.as_tuple(), b.as_tuple())
    return BoxGrad(*ga), BoxGrad(*gb)


def _giou_loss_grad4(
    a: Sequence[float], b: Sequence[float]
) -> tuple[tuple[float, float, float, float], tuple[float, float, float, float]]:
    """Gradient core over raw coordinate 4-tuples; see giou_loss_grad."""
    ax1, ay1, ax2, ay2 = a
    bx1, by1, bx2, by2 = b
    aw, ah = ax2 - ax1, ay2 - ay1
    bw, bh = bx2 - bx1, by2 - by1
    area_a = aw * ah
    area_b = bw * bh

    iw = min(ax2, bx2) - max(ax1, bx1)
    ih = min(ay2, by2) - max(ay1, by1)
    overlap = iw > 0.0 and ih > 0.0
    inter = iw * ih if overlap else 0.0
    union = area_a + area_b - inter
    cw = max(ax2, bx2) - min(ax1, bx1)
    ch = max(ay2, by2) - min(ay1, by1)
    c_area = cw * ch

    # Indicator slopes of the intersection edges; ties go to the a box,
    # and a clamped (empty) intersection has zero slope in all directions.
    if overlap:
        di_ax1 = (-1.0 if ax1 >= bx1 else 0.0) * ih
        di_ax2 = (1.0 if ax2 <= bx2 else 0.0) * ih
        di_ay1 = (-1.0 if ay1 >= by1 else 0.0) * iw
        di_ay2 = (1.0 if ay2 <= by2 else 0.0) * iw
        di_bx1 = (-1.0 if bx1 > ax1 else 0.0) * ih
        di_bx2 = (1.0 if bx2 < ax2 else 0.0) * ih
        di_by1 = (-1.0 if by1 > ay1 else 0.0) * iw
        di_by2 = (1.0 if by2 < ay2 else 0.0) * iw
    else:
        di_ax1 = di_ax2 = di_ay1 = di_ay2 = 0.0
        di_bx1 = di_bx2 = di_by1 = di_by2 = 0.0

    # Enclosing-box edge slopes, same tie rule.
    dc_ax1 = (-1.0 if ax1 <= bx1 else 0.0) * ch
    dc_ax2 = (1.0 if ax2 >= bx2 else 0.0) * ch
    dc_ay1 = (-1.0 if ay1 <= by1 else 0.0) * cw
    dc_ay2 = (1.0 if ay2 >= by2 else 0.0) * cw
    dc_bx1 = (-1.0 if bx1 < ax1 else 0.0) * ch
    dc_bx2 = (1.0 if bx2 > ax2 else 0.0) * ch
    dc_by1 = (-1.0 if by1 < ay1 else 0.0) * cw
    dc_by2 = (1.0 if by2 > ay2 else 0.0) * cw

    u2 = union * union
    c2 = c_area * c_area

    def per_coord(d_inter: float, d_area: float, d_c: float) -> float:
        # loss = 2 - inter/union - union/c_area, with union = A + B - inter
        d_union = d_area - d_inter
        term_iou = (d_inter * union - inter * d_union) / u2
        term_pen = (d_union * c_area - union * d_c) / c2
        return -term_iou - term_pen

    grad_a = (
        per_coord(di_ax1, -ah, dc_ax1),
        per_coord(di_ay1, -aw, dc_ay1),
        per_coord(di_ax2, ah, dc_ax2),
        per_coord(di_ay2, aw, dc_ay2),
    )
    grad_b = (
        per_coord(di_bx1, -bh, dc_bx1),
        per_coord(di_by1, -bw, dc_by1),
        per_coord(di_bx2, bh, dc_bx2),
        per_coord(di_by2, bw, dc_by2),
    )
    return grad_a, grad_b


def pairwise_iou(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """IoU for every pair of rows; a is (N, 4), b is (M, 4), result (N, M)."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ix1 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix2 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    iw = np.clip(ix2 - ix1, 0.0, None)
    ih = np.clip(iy2 - iy1, 0.0, None)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    return inter / union


def pairwise_giou_loss(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """giou_loss for every pair of rows; shapes as in pairwise_iou."""
    a = np.asarray(a, dtype=float).reshape(-1, 4)
    b = np.asarray(b, dtype=float).reshape(-1, 4)
    ix1 = np.maximum(a[:, None, 0], b[None, :, 0])
    iy1 = np.maximum(a[:, None, 1], b[None, :, 1])
    ix2 = np.minimum(a[:, None, 2], b[None, :, 2])
    iy2 = np.minimum(a[:, None, 3], b[None, :, 3])
    iw = np.clip(ix2 - ix1, 0.0, None)
    ih = np.clip(iy2 - iy1, 0.0, None)
    inter = iw * ih
    area_a = (a[:, 2] - a[:, 0]) * (a[:, 3] - a[:, 1])
    area_b = (b[:, 2] - b[:, 0]) * (b[:, 3] - b[:, 1])
    union = area_a[:, None] + area_b[None, :] - inter
    cw = np.maximum(a[:, None, 2], b[None, :, 2]) - np.minimum(a[:, None, 0], b[None, :, 0])
    ch = np.maximum(a[:, None, 3], b[None, :, 3]) - np.minimum(a[:, None, 1], b[None, :, 1])
    c_area = cw * ch
    return 1.0 - (inter / union - (c_area - union) / c_area)


def boxes_to_array(boxes: Sequence[BBox]) -> np.ndarray:
    """Stack boxes into an (N, 4) float array."""
    return np.array([b.as_tuple() for b in boxes], dtype=float).reshape(-1, 4)


def array_to_boxes(arr: np.ndarray) -> list[BBox]:
    """Inverse of boxes_to_array; validates every row."""
    return [BBox(*map(float, row)) for row in np.asarray(arr, dtype=float).reshape(-1, 4)]
