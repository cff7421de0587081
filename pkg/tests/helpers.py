"""Shared oracles: rasterized overlap, finite differences, random boxes."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from teamtrack import BBox


def raster_overlap(a: BBox, b: BBox, cells: int = 400) -> tuple[float, float]:
    """(iou, giou) measured by counting cell centers on a fine grid.

    Completely independent of the closed-form arithmetic: the enclosing
    region is covered with cells x cells samples and every area term
    becomes a count. Accuracy is O(1/cells).
    """
    x_lo, x_hi = min(a.x1, b.x1), max(a.x2, b.x2)
    y_lo, y_hi = min(a.y1, b.y1), max(a.y2, b.y2)
    xs = np.linspace(x_lo, x_hi, cells, endpoint=False) + (x_hi - x_lo) / (2 * cells)
    ys = np.linspace(y_lo, y_hi, cells, endpoint=False) + (y_hi - y_lo) / (2 * cells)
    gx, gy = np.meshgrid(xs, ys)
    in_a = (gx >= a.x1) & (gx <= a.x2) & (gy >= a.y1) & (gy <= a.y2)
    in_b = (gx >= b.x1) & (gx <= b.x2) & (gy >= b.y1) & (gy <= b.y2)
    inter = np.count_nonzero(in_a & in_b)
    union = np.count_nonzero(in_a | in_b)
    total = cells * cells
    iou_val = inter / union
    return iou_val, iou_val - (total - union) / total


def central_difference(f: Callable[[np.ndarray], float], x: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Central finite-difference gradient of f at x, one coordinate at a time."""
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        up = x.copy()
        dn = x.copy()
        up.flat[i] += h
        dn.flat[i] -= h
        g.flat[i] = (f(up) - f(dn)) / (2.0 * h)
    return g


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Worst per-component error, normalized so tiny gradients do not blow up."""
    analytic = np.asarray(analytic, dtype=float)
    numeric = np.asarray(numeric, dtype=float)
    scale = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return float(np.max(np.abs(analytic - numeric) / scale))


def random_box(rng: np.random.Generator, span: float = 20.0, min_side: float = 0.5) -> BBox:
    x1, y1 = rng.uniform(-span, span, size=2)
    w, h = rng.uniform(min_side, span / 2.0, size=2)
    return BBox(x1, y1, x1 + w, y1 + h)


def separated_pair(rng: np.random.Generator, margin: float) -> tuple[BBox, BBox]:
    """Random box pair whose min/max selections stay clear of ties.

    Ensures every coordinate comparison feeding the piecewise gradient is
    decided by more than `margin`, so a finite-difference probe of that
    size cannot cross a kink.
    """
    while True:
        a = random_box(rng)
        b = random_box(rng)
        gaps = [a.x1 - b.x1, a.x2 - b.x2, a.y1 - b.y1, a.y2 - b.y2]
        # intersection width/height must also stay away from the clamp at 0
        gaps.append(min(a.x2, b.x2) - max(a.x1, b.x1))
        gaps.append(min(a.y2, b.y2) - max(a.y1, b.y1))
        if all(abs(g) > margin for g in gaps):
            return a, b


def total_cost(cost: np.ndarray, pairs: Sequence[tuple[int, int]]) -> float:
    return float(sum(cost[r, c] for r, c in pairs))
