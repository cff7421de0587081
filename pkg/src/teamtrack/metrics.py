"""Tracking evaluation against ground truth.

CLEAR-style accounting per frame (false positives, misses, identity
switches, matched-overlap precision) plus trajectory-level identity F1,
and the flat per-split dataset summary used to describe corpora.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .assignment import hungarian
from .geometry import boxes_to_array, pairwise_iou
from .motio import FrameRecord, group_by_frame

__all__ = ["EvalResult", "DatasetStats", "evaluate", "dataset_stats"]

# cost for pairs below the overlap threshold; large enough that the
# solver only takes them when a row has no admissible column left
_BLOCKED = 1e6


@dataclass(frozen=True)
class EvalResult:
    """Evaluation summary; mota = 1 - (fp + fn + ids) / gt_total."""

    mota: float
    motp: float
    idf1: float
    mt_ratio: float
    fp: int
    fn: int
    ids: int
    gt_total: int


@dataclass(frozen=True)
class DatasetStats:
    """Corpus shape: totals plus the per-video / per-frame ratios."""

    frames: int
    objects: int
    tracks: int
    videos: int
    frames_per_video: float
    objects_per_frame: float
    tracks_per_video: float


def _iou_matrix(gts: Sequence[FrameRecord], preds: Sequence[FrameRecord]) -> np.ndarray:
    return pairwise_iou(
        boxes_to_array([g.to_bbox() for g in gts]),
        boxes_to_array([p.to_bbox() for p in preds]),
    )


def evaluate(
    predictions: Sequence[FrameRecord],
    ground_truth: Sequence[FrameRecord],
    iou_threshold: float = 0.5,
) -> EvalResult:
    """Score predictions frame by frame, then identities globally.

    Per frame, a ground-truth box keeps its previous prediction when that
    id is present and still overlaps at iou_threshold or better; the
    remainder are matched by maximum IoU. A ground-truth trajectory
    counts as mostly tracked when at least 80% of its frames matched.
    Identity switches compare against the last matched prediction id,
    however long ago; IDF1 matches whole trajectories by co-occurrence
    counts.

    Raises:
        ValueError: empty ground truth, or predictions on frames outside
            the ground-truth range.
    """
    if not ground_truth:
        raise ValueError("ground truth is empty")
    if not 0.0 < iou_threshold <= 1.0:
        raise ValueError(f"iou_threshold must lie in (0, 1], got {iou_threshold}")
    gt_frames = group_by_frame(ground_truth)
    pred_frames = group_by_frame(predictions)
    if len(pred_frames) > len(gt_frames):
        raise ValueError(
            f"predictions reach frame {len(pred_frames)} but ground truth ends at {len(gt_frames)}"
        )
    pred_frames += [[] for _ in range(len(gt_frames) - len(pred_frames))]

    fp = fn = ids = 0
    iou_sum = 0.0
    matched_total = 0
    last_pred_id: dict[int, int] = {}
    gt_span: Counter[int] = Counter()
    gt_hit: Counter[int] = Counter()
    co_occurrence: Counter[tuple[int, int]] = Counter()

    for gts, preds in zip(gt_frames, pred_frames):
        for g in gts:
            gt_span[g.track_id] += 1
        if not gts or not preds:
            fn += len(gts)
            fp += len(preds)
            continue
        iou = _iou_matrix(gts, preds)
        for gi in range(len(gts)):
            for pj in range(len(preds)):
                if iou[gi, pj] >= iou_threshold:
                    co_occurrence[(gts[gi].track_id, preds[pj].track_id)] += 1

        pred_col = {p.track_id: j for j, p in enumerate(preds)}
        taken_cols: set[int] = set()
        frame_pairs: list[tuple[int, int]] = []
        free_rows = []
        for gi, g in enumerate(gts):
            pj = pred_col.get(last_pred_id.get(g.track_id))
            if pj is not None and pj not in taken_cols and iou[gi, pj] >= iou_threshold:
                frame_pairs.append((gi, pj))
                taken_cols.add(pj)
            else:
                free_rows.append(gi)
        free_cols = [j for j in range(len(preds)) if j not in taken_cols]
        if free_rows and free_cols:
            sub = iou[np.ix_(free_rows, free_cols)]
            cost = np.where(sub >= iou_threshold, 1.0 - sub, _BLOCKED)
            for r, c in hungarian(cost):
                if sub[r, c] >= iou_threshold:
                    frame_pairs.append((free_rows[r], free_cols[c]))

        for gi, pj in frame_pairs:
            gid, pid = gts[gi].track_id, preds[pj].track_id
            if gid in last_pred_id and last_pred_id[gid] != pid:
                ids += 1
            last_pred_id[gid] = pid
            gt_hit[gid] += 1
            iou_sum += float(iou[gi, pj])
        matched_total += len(frame_pairs)
        fn += len(gts) - len(frame_pairs)
        fp += len(preds) - len(frame_pairs)

    gt_total = len(ground_truth)
    pred_total = len(predictions)
    mota = 1.0 - (fp + fn + ids) / gt_total
    motp = iou_sum / matched_total if matched_total else 0.0
    mt = sum(1 for gid, span in gt_span.items() if gt_hit[gid] / span >= 0.8)
    idf1 = _identity_f1(co_occurrence, gt_total, pred_total)
    return EvalResult(mota, motp, idf1, mt / len(gt_span), fp, fn, ids, gt_total)


def _identity_f1(
    co_occurrence: Counter[tuple[int, int]], gt_total: int, pred_total: int
) -> float:
    """Best one-to-one trajectory pairing, scored as an F1 over box counts."""
    if not co_occurrence:
        return 0.0
    gt_ids = sorted({g for g, _ in co_occurrence})
    pred_ids = sorted({p for _, p in co_occurrence})
    gain = np.zeros((len(gt_ids), len(pred_ids)))
    g_row = {g: i for i, g in enumerate(gt_ids)}
    p_col = {p: j for j, p in enumerate(pred_ids)}
    for (g, p), n in co_occurrence.items():
        gain[g_row[g], p_col[p]] = n
    idtp = sum(float(gain[r, c]) for r, c in hungarian(-gain))
    return 2.0 * idtp / (gt_total + pred_total)


def dataset_stats(records: Sequence[FrameRecord], video_count: int = 1) -> DatasetStats:
    """Summarize a split the way corpus tables are usually laid out.

    frames counts distinct frame numbers, objects counts records, tracks
    counts distinct ids; the ratios divide by video_count or frames.
    """
    if not records:
        raise ValueError("records must be nonempty")
    if video_count < 1:
        raise ValueError(f"video_count must be >= 1, got {video_count}")
    frames = len({r.frame for r in records})
    objects = len(records)
    tracks = len({r.track_id for r in records})
    return DatasetStats(
        frames=frames,
        objects=objects,
        tracks=tracks,
        videos=video_count,
        frames_per_video=frames / video_count,
        objects_per_frame=objects / frames,
        tracks_per_video=tracks / video_count,
    )
