"""Figure rendering for the report-producing commands.

Each helper writes one PNG next to the delimited report it illustrates.
Rendering is headless (Agg); nothing here opens a window.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .metrics import EvalResult

__all__ = ["BenchRow", "save_eval_figure", "save_bench_figure", "save_loss_figure"]


@dataclass(frozen=True)
class BenchRow:
    """One strategy's benchmark summary."""

    strategy: str
    median_ms: float
    mean_ms: float
    mean_iterations: float
    max_probes_per_iteration: float


def save_eval_figure(result: EvalResult, path: str | Path) -> None:
    """Two panels: the ratio metrics and the raw error counts."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(8.0, 3.6))
    names = ["MOTA", "MOTP", "IDF1", "MT"]
    values = [result.mota, result.motp, result.idf1, result.mt_ratio]
    bars = left.bar(names, values, color="#4878cf")
    left.axhline(0.0, color="black", linewidth=0.8)
    left.set_ylim(min(0.0, min(values)) - 0.05, 1.05)
    left.bar_label(bars, fmt="%.3f", fontsize=8)
    left.set_title("ratio metrics")

    counts = [result.fp, result.fn, result.ids]
    bars = right.bar(["FP", "FN", "IDS"], counts, color="#d65f5f")
    right.bar_label(bars, fontsize=8)
    right.set_title(f"error counts (of {result.gt_total} gt boxes)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_bench_figure(rows: Sequence[BenchRow], path: str | Path) -> None:
    """Association time per strategy, with rally effort alongside."""
    fig, (left, right) = plt.subplots(1, 2, figsize=(8.0, 3.6))
    names = [r.strategy for r in rows]
    bars = left.bar(names, [r.median_ms for r in rows], color="#4878cf")
    left.bar_label(bars, fmt="%.2f", fontsize=8)
    left.set_ylabel("median ms / frame")
    left.set_title("association time")

    x = range(len(rows))
    right.bar(
        [i - 0.2 for i in x], [r.mean_iterations for r in rows], width=0.4, label="mean iterations"
    )
    right.bar(
        [i + 0.2 for i in x],
        [r.max_probes_per_iteration for r in rows],
        width=0.4,
        label="max probes / iteration",
    )
    right.set_xticks(list(x), names)
    right.legend(fontsize=8)
    right.set_title("rally effort")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_loss_figure(
    before: Sequence[float],
    after: Sequence[float] | None,
    lower_bound: float,
    path: str | Path,
) -> None:
    """Histogram of pairwise losses, before and (optionally) after descent."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    bins = 40
    ax.hist(list(before), bins=bins, alpha=0.6, label="before", color="#d65f5f")
    if after is not None:
        ax.hist(list(after), bins=bins, alpha=0.6, label="after", color="#4878cf")
    ax.axvline(lower_bound, color="black", linestyle="--", linewidth=1.0, label="lower bound")
    ax.set_xlabel("pairwise giou loss")
    ax.set_ylabel("pairs")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
