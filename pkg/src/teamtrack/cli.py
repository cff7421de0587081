"""Command-line surface for the toolkit.

Subcommands: synth (build a scenario), track (run the tracker over a
detection file), eval (score a tracker output against ground truth),
stats (describe gt files), decontaminate (report and repair duplicate
detections), bench (compare replacing strategies).

Every run writes a key=value manifest next to its primary output so a
result can be reproduced from the recorded configuration. Exit codes:
0 success, 1 runtime or I/O failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import asdict
from pathlib import Path
from statistics import mean, median
from typing import Callable, Sequence

from .association import STRATEGIES, Detection, RhConfig
from .decontaminator import (
    DecontaminatorConfig,
    decontaminate,
    detect_duplicates,
    self_giou_matrix,
    suppress_duplicates,
)
from .geometry import BBox
from .metrics import DatasetStats, dataset_stats, evaluate
from .motio import FrameRecord, MotFormatError, group_by_frame, parse_mot_csv, write_mot_csv
from .report import BenchRow, save_bench_figure, save_eval_figure, save_loss_figure
from .synth import RNG_NAME, ScenarioConfig, generate
from .tracker import Tracker, TrackerConfig, run_sequence

from . import __version__

__all__ = ["UsageError", "main", "entry"]

# lineup size and candidate cap per sport
_PRESETS = {
    "volleyball": (12, 22),
    "basketball": (10, 15),
    "soccer": (15, 20),
}


class UsageError(ValueError):
    """Bad flag value or combination; maps to exit code 2."""


def _configured(build: Callable):
    # config constructors validate their fields; surface those as usage errors
    try:
        return build()
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _write_manifest(path: Path, command: str, fields: dict) -> None:
    lines = [f"command={command}", f"version={__version__}"]
    lines += [f"{key}={fields[key]}" for key in sorted(fields)]
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")


def _read_records(path_str: str) -> list[FrameRecord]:
    with open(path_str, "r", encoding="utf-8") as fh:
        return parse_mot_csv(fh)


def _detection_frames(records: Sequence[FrameRecord]) -> list[list[Detection]]:
    # raw detector confidences may stray outside [0, 1]; clamp at the edge
    return [
        [Detection(r.to_bbox(), min(1.0, max(0.0, r.conf))) for r in frame]
        for frame in group_by_frame(records)
    ]


def _resolve_lineup(args: argparse.Namespace) -> tuple[int, int]:
    top_k, max_candidates = 12, 22
    if args.preset is not None:
        top_k, max_candidates = _PRESETS[args.preset]
    if args.top_k is not None:
        top_k = args.top_k
    if args.max_candidates is not None:
        max_candidates = args.max_candidates
    return top_k, max_candidates


def _add_lineup_flags(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--preset", choices=sorted(_PRESETS), default=None,
                     help="sport preset for --top-k/--max-candidates")
    sub.add_argument("--top-k", type=int, default=None, help="lineup size (default 12)")
    sub.add_argument("--max-candidates", type=int, default=None,
                     help="detections considered per frame (default 22)")
    sub.add_argument("--age-l", type=int, default=80,
                     help="frames a track survives unmatched (default 80)")
    sub.add_argument("--theta", type=float, default=1.0,
                     help="accept threshold on matched giou loss (default 1.0)")


# ---------------------------------------------------------------- synth


def cmd_synth(args: argparse.Namespace) -> int:
    cfg = _configured(lambda: ScenarioConfig(
        seed=args.seed,
        athletes=args.athletes,
        frames=args.frames,
        arena=tuple(args.arena),
        box_size=tuple(args.box_size),
        speed_max=args.speed_max,
        duplicate_rate=args.duplicate_rate,
        duplicate_offset_max=args.duplicate_offset_max,
        miss_rate=args.miss_rate,
        jitter_sigma=args.jitter_sigma,
        score_true_range=tuple(args.score_true),
        score_dup_range=tuple(args.score_dup),
    ))
    started = time.perf_counter()
    ground_truth, det_frames = generate(cfg)
    det_records = [
        FrameRecord(frame_no, -1, d.box.x1, d.box.y1, d.box.width, d.box.height, conf=d.score)
        for frame_no, frame in enumerate(det_frames, start=1)
        for d in frame
    ]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gt_path = out_dir / f"{args.name}.gt.csv"
    det_path = out_dir / f"{args.name}.det.csv"
    gt_path.write_text(write_mot_csv(ground_truth), encoding="utf-8")
    det_path.write_text(write_mot_csv(det_records), encoding="utf-8")

    fields = asdict(cfg) | {
        "rng": RNG_NAME,
        "gt_path": gt_path,
        "det_path": det_path,
        "gt_records": len(ground_truth),
        "det_records": len(det_records),
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(out_dir / f"{args.name}.manifest", "synth", fields)
    print(f"wrote {gt_path} ({len(ground_truth)} records), {det_path} ({len(det_records)} records)")
    return 0


# ---------------------------------------------------------------- track


def cmd_track(args: argparse.Namespace) -> int:
    top_k, max_candidates = _resolve_lineup(args)
    rh_cfg = _configured(lambda: RhConfig(
        top_k=top_k,
        accept_threshold=args.theta,
        strategy=args.strategy,
        max_candidates=max_candidates,
    ))
    tracker_cfg = _configured(lambda: TrackerConfig(
        age_l=args.age_l,
        rh=rh_cfg,
        use_rh=args.associator == "rh",
        new_track_min_score=args.new_track_min_score,
        constant_velocity=args.constant_velocity,
    ))
    if args.decontaminate_first and not 0.0 < args.lb < 2.0:
        raise UsageError(f"--lb must lie in (0, 2), got {args.lb}")

    started = time.perf_counter()
    frames = _detection_frames(_read_records(args.det))
    if args.decontaminate_first:
        frames = [suppress_duplicates(frame, args.lb) for frame in frames]
    tracker = Tracker(tracker_cfg)
    records = run_sequence(frames, tracker=tracker)
    out_path = Path(args.out)
    out_path.write_text(write_mot_csv(records), encoding="utf-8")

    identities = len({r.track_id for r in records})
    stats = tracker.frame_stats
    fields = {
        "det_path": args.det,
        "out_path": out_path,
        "associator": args.associator,
        "strategy": args.strategy,
        "top_k": top_k,
        "max_candidates": max_candidates,
        "age_l": args.age_l,
        "theta": args.theta,
        "new_track_min_score": args.new_track_min_score,
        "constant_velocity": args.constant_velocity,
        "decontaminate_first": args.decontaminate_first,
        "lb": args.lb,
        "frames": len(frames),
        "output_records": len(records),
        "identities": identities,
        "mean_rally_iterations": f"{mean(s.rally_iterations for s in stats):.3f}" if stats else "0",
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(Path(str(out_path) + ".manifest"), "track", fields)
    print(f"tracked {len(frames)} frames -> {out_path}: {len(records)} boxes, {identities} identities")
    return 0


# ----------------------------------------------------------------- eval


def cmd_eval(args: argparse.Namespace) -> int:
    if not 0.0 < args.iou_threshold <= 1.0:
        raise UsageError(f"--iou-threshold must lie in (0, 1], got {args.iou_threshold}")
    started = time.perf_counter()
    predictions = _read_records(args.pred)
    ground_truth = _read_records(args.gt)
    result = evaluate(predictions, ground_truth, args.iou_threshold)

    for key, value in asdict(result).items():
        print(f"{key}={value:.6f}" if isinstance(value, float) else f"{key}={value}")

    report_path = Path(args.report)
    header = ",".join(["pred", "gt"] + list(asdict(result)))
    row = ",".join([args.pred, args.gt] + [repr(v) for v in asdict(result).values()])
    report_path.write_text(header + "\n" + row + "\n", encoding="utf-8")
    figure_path = report_path.with_suffix(".png")
    save_eval_figure(result, figure_path)

    fields = {
        "pred_path": args.pred,
        "gt_path": args.gt,
        "iou_threshold": args.iou_threshold,
        "report_path": report_path,
        "figure_path": figure_path,
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(Path(str(report_path) + ".manifest"), "eval", fields)
    return 0


# ---------------------------------------------------------------- stats


def _stats_line(label: str, s: DatasetStats) -> str:
    return (
        f"{label}: frames={s.frames} objects={s.objects} tracks={s.tracks} "
        f"videos={s.videos} F/V={s.frames_per_video:.1f} O/F={s.objects_per_frame:.1f} "
        f"T/V={s.tracks_per_video:.1f}"
    )


def cmd_stats(args: argparse.Namespace) -> int:
    if args.video_count is not None and args.video_count < 1:
        raise UsageError(f"--video-count must be >= 1, got {args.video_count}")
    started = time.perf_counter()
    per_file = [(path, dataset_stats(_read_records(path), 1)) for path in args.gt]

    videos = args.video_count if args.video_count is not None else len(per_file)
    frames = sum(s.frames for _, s in per_file)
    objects = sum(s.objects for _, s in per_file)
    tracks = sum(s.tracks for _, s in per_file)
    total = DatasetStats(
        frames, objects, tracks, videos, frames / videos, objects / frames, tracks / videos
    )

    rows = ["file,frames,objects,tracks,videos,frames_per_video,objects_per_frame,tracks_per_video"]
    for path, s in per_file:
        print(_stats_line(path, s))
        rows.append(f"{path},{s.frames},{s.objects},{s.tracks},{s.videos},"
                    f"{s.frames_per_video!r},{s.objects_per_frame!r},{s.tracks_per_video!r}")
    print(_stats_line("total", total))
    rows.append(f"total,{total.frames},{total.objects},{total.tracks},{total.videos},"
                f"{total.frames_per_video!r},{total.objects_per_frame!r},{total.tracks_per_video!r}")

    report_path = Path(args.report)
    report_path.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    fields = {
        "gt_paths": ";".join(args.gt),
        "video_count": videos,
        "report_path": report_path,
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(Path(str(report_path) + ".manifest"), "stats", fields)
    return 0


# ------------------------------------------------------- decontaminate


def cmd_decontaminate(args: argparse.Namespace) -> int:
    cfg = _configured(lambda: DecontaminatorConfig(lower_bound=args.lb, mode="repulsive"))
    if args.max_steps < 1:
        raise UsageError(f"--max-steps must be >= 1, got {args.max_steps}")
    started = time.perf_counter()
    records = _read_records(args.det)
    frames = group_by_frame(records)
    if args.frame is not None:
        if not 1 <= args.frame <= len(frames):
            raise UsageError(f"--frame must lie in 1..{len(frames)}, got {args.frame}")
        selected = [(args.frame, frames[args.frame - 1])]
    else:
        selected = list(enumerate(frames, start=1))

    losses_before: list[float] = []
    losses_after: list[float] = []
    out_frames: dict[int, list[BBox]] = {}
    rows = ["frame,boxes,duplicate_pairs,min_loss_before,steps,min_loss_after"]
    for frame_no, frame in selected:
        boxes = [r.to_bbox() for r in frame]
        if len(boxes) < 2:
            print(f"frame {frame_no}: 0 duplicate pairs")
            rows.append(f"{frame_no},{len(boxes)},0,,,")
            continue
        matrix = self_giou_matrix(boxes)
        pairs = detect_duplicates(matrix, cfg)
        upper = [float(matrix[i, j]) for i in range(len(boxes)) for j in range(i + 1, len(boxes))]
        losses_before += upper
        min_before = min(upper)
        print(f"frame {frame_no}: {len(pairs)} duplicate pairs")
        for i, j, loss in pairs:
            print(f"  boxes ({i}, {j}): loss {loss:.6f}")
        steps_text = after_text = ""
        if args.descend:
            moved, steps = decontaminate(boxes, cfg, args.step_size, args.max_steps)
            after = self_giou_matrix(moved)
            upper_after = [
                float(after[i, j]) for i in range(len(moved)) for j in range(i + 1, len(moved))
            ]
            losses_after += upper_after
            min_after = min(upper_after)
            out_frames[frame_no] = moved
            steps_text, after_text = str(steps), repr(min_after)
            print(f"  descent: {steps} steps, min pairwise loss {min_after:.6f}")
        rows.append(
            f"{frame_no},{len(boxes)},{len(pairs)},{min_before!r},{steps_text},{after_text}"
        )

    if args.descend and args.out is not None:
        # untouched frames pass through unchanged
        moved_records = []
        for frame_no, frame in enumerate(frames, start=1):
            boxes = out_frames.get(frame_no)
            for k, r in enumerate(frame):
                b = boxes[k] if boxes is not None else r.to_bbox()
                moved_records.append(
                    FrameRecord(r.frame, r.track_id, b.x1, b.y1, b.width, b.height,
                                r.conf, r.class_id, r.visibility)
                )
        Path(args.out).write_text(write_mot_csv(moved_records), encoding="utf-8")

    report_path = Path(args.report)
    report_path.write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    figure_path = report_path.with_suffix(".png")
    save_loss_figure(losses_before, losses_after if args.descend else None, args.lb, figure_path)
    fields = {
        "det_path": args.det,
        "lb": args.lb,
        "descend": args.descend,
        "step_size": args.step_size,
        "max_steps": args.max_steps,
        "frame": args.frame if args.frame is not None else "all",
        "out_path": args.out if args.out is not None else "",
        "report_path": report_path,
        "figure_path": figure_path,
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(Path(str(report_path) + ".manifest"), "decontaminate", fields)
    return 0


# ---------------------------------------------------------------- bench


def cmd_bench(args: argparse.Namespace) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    unknown = [s for s in strategies if s not in STRATEGIES]
    if unknown or not strategies:
        raise UsageError(f"--strategies must name strategies from {STRATEGIES}, got {args.strategies!r}")
    if args.repeats < 1:
        raise UsageError(f"--repeats must be >= 1, got {args.repeats}")
    top_k, max_candidates = _resolve_lineup(args)

    started = time.perf_counter()
    frames = _detection_frames(_read_records(args.det))
    per_strategy_ppi: dict[str, list[float]] = {}
    benchrows: list[BenchRow] = []
    for strategy in strategies:
        rh_cfg = _configured(lambda: RhConfig(
            top_k=top_k,
            accept_threshold=args.theta,
            strategy=strategy,
            max_candidates=max_candidates,
        ))
        cfg = TrackerConfig(age_l=args.age_l, rh=rh_cfg)
        rep_means = []
        stats = None
        for _ in range(args.repeats):
            tracker = Tracker(cfg)
            run_sequence(frames, tracker=tracker)
            stats = tracker.frame_stats
            rep_means.append(mean(s.assoc_seconds for s in stats) if stats else 0.0)
        ppi = [s.probes / max(1, s.rally_iterations) for s in stats]
        per_strategy_ppi[strategy] = ppi
        benchrows.append(BenchRow(
            strategy=strategy,
            median_ms=1e3 * median(rep_means),
            mean_ms=1e3 * mean(rep_means),
            mean_iterations=mean(s.rally_iterations for s in stats) if stats else 0.0,
            max_probes_per_iteration=max(ppi, default=0.0),
        ))
        row = benchrows[-1]
        print(f"{strategy}: median {row.median_ms:.3f} ms/frame, "
              f"mean iterations {row.mean_iterations:.3f}, "
              f"max probes/iteration {row.max_probes_per_iteration:.1f}")

    if "RS4" in per_strategy_ppi:
        rs4 = per_strategy_ppi["RS4"]
        fewest = all(
            rs4[f] <= other[f]
            for name, other in per_strategy_ppi.items()
            for f in range(len(rs4))
        )
        print(f"RS4 fewest probes per iteration on every frame: {'yes' if fewest else 'NO'}")

    report_path = Path(args.report)
    header = "strategy,median_ms_per_frame,mean_ms_per_frame,mean_rally_iterations,max_probes_per_iteration,frames,repeats"
    lines = [header] + [
        f"{r.strategy},{r.median_ms!r},{r.mean_ms!r},{r.mean_iterations!r},"
        f"{r.max_probes_per_iteration!r},{len(frames)},{args.repeats}"
        for r in benchrows
    ]
    report_path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    figure_path = report_path.with_suffix(".png")
    save_bench_figure(benchrows, figure_path)
    fields = {
        "det_path": args.det,
        "strategies": ",".join(strategies),
        "repeats": args.repeats,
        "top_k": top_k,
        "max_candidates": max_candidates,
        "age_l": args.age_l,
        "theta": args.theta,
        "report_path": report_path,
        "figure_path": figure_path,
        "wall_time_s": f"{time.perf_counter() - started:.3f}",
    }
    _write_manifest(Path(str(report_path) + ".manifest"), "bench", fields)
    return 0


# --------------------------------------------------------------- parser


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="teamtrack",
        description="Team-sport multi-object tracking toolkit.",
    )
    parser.add_argument("--version", action="version", version=f"teamtrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic scenario (gt + detections)")
    p.add_argument("--seed", type=int, required=True, help="rng seed (required: runs must reproduce)")
    p.add_argument("--athletes", type=int, default=12)
    p.add_argument("--frames", type=int, default=800)
    p.add_argument("--arena", type=float, nargs=2, default=[960.0, 540.0], metavar=("W", "H"))
    p.add_argument("--box-size", type=float, nargs=2, default=[40.0, 80.0], metavar=("W", "H"))
    p.add_argument("--speed-max", type=float, default=6.0)
    p.add_argument("--duplicate-rate", type=float, default=0.0)
    p.add_argument("--duplicate-offset-max", type=float, default=2.0)
    p.add_argument("--miss-rate", type=float, default=0.0)
    p.add_argument("--jitter-sigma", type=float, default=0.0)
    p.add_argument("--score-true", type=float, nargs=2, default=[0.60, 0.99], metavar=("LO", "HI"))
    p.add_argument("--score-dup", type=float, nargs=2, default=[0.45, 0.90], metavar=("LO", "HI"))
    p.add_argument("--out-dir", default=".")
    p.add_argument("--name", default="scenario", help="output file prefix")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("track", help="run the tracker over a detection file")
    p.add_argument("--det", required=True, help="detection CSV (id column ignored)")
    p.add_argument("--out", default="tracked.csv")
    p.add_argument("--associator", choices=("plain", "rh"), default="rh")
    p.add_argument("--strategy", choices=STRATEGIES, default="RS5")
    _add_lineup_flags(p)
    p.add_argument("--new-track-min-score", type=float, default=0.4)
    p.add_argument("--constant-velocity", action="store_true")
    p.add_argument("--decontaminate-first", action="store_true",
                   help="suppress duplicate detections before association")
    p.add_argument("--lb", type=float, default=0.2,
                   help="duplicate lower bound for --decontaminate-first (default 0.2)")
    p.set_defaults(func=cmd_track)

    p = sub.add_parser("eval", help="score a tracker output against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--iou-threshold", type=float, default=0.5)
    p.add_argument("--report", default="eval_report.csv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="per-file and aggregate dataset statistics")
    p.add_argument("gt", nargs="+", help="ground-truth CSV files, one per video")
    p.add_argument("--video-count", type=int, default=None,
                   help="override the aggregate video count (default: number of files)")
    p.add_argument("--report", default="stats_report.csv")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("decontaminate", help="report duplicate pairs; optionally push them apart")
    p.add_argument("--det", required=True)
    p.add_argument("--lb", type=float, default=0.011, help="duplicate lower bound (default 0.011)")
    p.add_argument("--frame", type=int, default=None, help="restrict to one frame (1-based)")
    p.add_argument("--descend", action="store_true", help="run repulsive gradient descent")
    p.add_argument("--step-size", type=float, default=0.5)
    p.add_argument("--max-steps", type=int, default=500)
    p.add_argument("--out", default=None, help="write decontaminated detections here (with --descend)")
    p.add_argument("--report", default="decontaminate_report.csv")
    p.set_defaults(func=cmd_decontaminate)

    p = sub.add_parser("bench", help="time the replacing strategies on one scenario")
    p.add_argument("--det", required=True)
    p.add_argument("--strategies", default=",".join(STRATEGIES))
    p.add_argument("--repeats", type=int, default=5, help="timing repeats (median reported)")
    _add_lineup_flags(p)
    p.add_argument("--report", default="bench_report.csv")
    p.set_defaults(func=cmd_bench)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Run one command; returns the exit code instead of raising."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except MotFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entry()
