"""Figure rendering writes real PNG files."""

from __future__ import annotations

from pathlib import Path

from teamtrack.metrics import EvalResult
from teamtrack.report import BenchRow, save_bench_figure, save_eval_figure, save_loss_figure

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _assert_png(path: Path) -> None:
    data = path.read_bytes()
    assert data[:8] == _PNG_MAGIC
    assert len(data) > 1000


def test_eval_figure(tmp_path: Path) -> None:
    result = EvalResult(
        mota=0.91, motp=0.84, idf1=0.88, mt_ratio=0.75, fp=12, fn=30, ids=3, gt_total=500
    )
    out = tmp_path / "eval.png"
    save_eval_figure(result, out)
    _assert_png(out)


def test_bench_figure(tmp_path: Path) -> None:
    rows = [
        BenchRow("RS1", 0.8, 0.9, 1.2, 0.0),
        BenchRow("RS4", 0.7, 0.8, 1.1, 0.0),
        BenchRow("RS5", 0.9, 1.0, 1.3, 2.0),
    ]
    out = tmp_path / "bench.png"
    save_bench_figure(rows, out)
    _assert_png(out)


def test_loss_figure_with_and_without_after(tmp_path: Path) -> None:
    before = [0.001, 0.004, 0.3, 0.9, 1.2]
    both = tmp_path / "both.png"
    save_loss_figure(before, [0.02, 0.05, 0.3, 0.9, 1.2], 0.011, both)
    _assert_png(both)
    only = tmp_path / "only.png"
    save_loss_figure(before, None, 0.011, only)
    _assert_png(only)
