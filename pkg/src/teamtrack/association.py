"""Frame-to-frame matching between detections and track boxes.

Detections are split by confidence into a starting lineup and a
substitution pool, the way a fixed-size team takes the court while
reserves wait on the bench. The lineup is matched to track boxes by
minimum GIoU loss; rows whose matched cost is unacceptable get swapped
for substitutes under one of five replacing strategies until every match
is acceptable or the bench is empty. A one-shot Hungarian baseline over
all detections is provided for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .assignment import hungarian
from .geometry import BBox, boxes_to_array, pairwise_giou_loss

__all__ = [
    "STRATEGIES",
    "Detection",
    "RhConfig",
    "AssociationResult",
    "ReplacementPlan",
    "split_lineup",
    "match_cost_matrix",
    "apply_strategy",
    "rally_hungarian",
    "plain_hungarian_associate",
]

STRATEGIES = ("RS1", "RS2", "RS3", "RS4", "RS5")


@dataclass(frozen=True)
class Detection:
    """A scored candidate box for one frame."""

    box: BBox
    score: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= 1.0:
            raise ValueError(f"score must lie in [0, 1], got {self.score}")


@dataclass(frozen=True)
class RhConfig:
    """Lineup-matching settings.

    Attributes:
        top_k: lineup size; the K highest-scoring detections start.
        accept_threshold: a matched giou_loss above this is unacceptable.
        strategy: replacing strategy, one of RS1..RS5 (see apply_strategy).
        max_candidates: total detections considered per frame; whatever
            the lineup does not take becomes the substitution pool.
    """

    top_k: int = 12
    accept_threshold: float = 1.0
    strategy: str = "RS5"
    max_candidates: int = 22

    def __post_init__(self) -> None:
        if self.top_k < 1:
            raise ValueError(f"top_k must be >= 1, got {self.top_k}")
        if self.max_candidates < self.top_k:
            raise ValueError(
                f"max_candidates ({self.max_candidates}) must be >= top_k ({self.top_k})"
            )
        if not 0.0 < self.accept_threshold <= 2.0:
            raise ValueError(f"accept_threshold must lie in (0, 2], got {self.accept_threshold}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"strategy must be one of {STRATEGIES}, got {self.strategy!r}")


@dataclass
class AssociationResult:
    """Outcome of matching one frame.

    matches holds (detection index, track index, giou loss) with indices
    into the caller's lists; every detection and track index appears at
    most once across matches and the unmatched lists. final_lineup lists
    the detection indices on the court when matching settled, discarded
    those that were fielded at some point and then replaced, and probes
    counts how many substitution candidates had their fit evaluated.
    """

    matches: list[tuple[int, int, float]]
    unmatched_detections: list[int]
    unmatched_tracks: list[int]
    rally_iterations: int = 0
    probes: int = 0
    final_lineup: tuple[int, ...] = ()
    discarded: tuple[int, ...] = ()


@dataclass(frozen=True)
class ReplacementPlan:
    """Lineup edit for one rally iteration.

    delete_rows are lineup positions to clear, worst match first.
    insert_items are substitute identifiers to field in those slots, in
    order; never more of them than deletions. probes counts goodness
    evaluations charged to building the plan.
    """

    delete_rows: tuple[int, ...]
    insert_items: tuple[int, ...] = ()
    probes: int = 0


def split_lineup(detections: Sequence[Detection], k: int) -> tuple[list[Detection], list[Detection]]:
    """Split detections into the top-k lineup and the substitution pool.

    Sorting by descending score is done here defensively; input order
    only breaks score ties.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    order = sorted(range(len(detections)), key=lambda i: (-detections[i].score, i))
    return [detections[i] for i in order[:k]], [detections[i] for i in order[k:]]


def match_cost_matrix(lineup: Sequence[BBox], tracks: Sequence[BBox]) -> np.ndarray:
    """GIoU-loss cost matrix, lineup boxes as rows and tracks as columns."""
    if len(lineup) == 0 or len(tracks) == 0:
        raise ValueError("cost matrix needs at least one box on each side")
    return pairwise_giou_loss(boxes_to_array(lineup), boxes_to_array(tracks))


def apply_strategy(
    bad_rows: Sequence[int],
    substitution: Sequence,
    strategy: str,
    good: Callable | None = None,
) -> ReplacementPlan:
    """Decide which bad lineup rows to drop and which substitutes to field.

    The five strategies differ in how many bad rows go (all of them, or
    just the worst one) and how the replacement is picked (highest score
    blindly, first acceptable candidate, or a score-ordered batch):

        RS1  drop all, field the top scorer
        RS2  drop all, field the first acceptable candidate
        RS3  drop all, field the min(bad, pool) top scorers
        RS4  drop the worst only, field the top scorer
        RS5  drop the worst only, field the first acceptable candidate

    RS2 and RS5 probe candidates through `good` in pool order; when no
    candidate is acceptable there is nothing worth fielding and the plan
    comes back empty, which ends the rally with the bad matches kept.
    RS1/RS3/RS4 never evaluate fit, hence zero probes.

    Args:
        bad_rows: lineup row positions ordered worst cost first.
        substitution: substitute identifiers in descending score order.
        strategy: one of RS1..RS5.
        good: acceptability predicate over a substitute; None accepts all.

    Returns:
        ReplacementPlan; with an empty pool the plan only deletes.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"strategy must be one of {STRATEGIES}, got {strategy!r}")
    if len(bad_rows) == 0:
        raise ValueError("bad_rows must be nonempty")
    deletes = tuple(bad_rows[:1]) if strategy in ("RS4", "RS5") else tuple(bad_rows)
    pool = list(substitution)
    if not pool:
        return ReplacementPlan(deletes)
    if strategy == "RS3":
        return ReplacementPlan(deletes, tuple(pool[: min(len(deletes), len(pool))]))
    if strategy in ("RS1", "RS4"):
        return ReplacementPlan(deletes, (pool[0],))
    probes = 0
    for cand in pool:
        probes += 1
        if good is None or good(cand):
            return ReplacementPlan(deletes, (cand,), probes)
    return ReplacementPlan((), (), probes)


def rally_hungarian(
    detections: Sequence[Detection], tracks: Sequence[BBox], cfg: RhConfig
) -> AssociationResult:
    """Match detections to track boxes with lineup substitution.

    Each iteration solves the assignment for the current lineup, collects
    matched rows whose cost exceeds cfg.accept_threshold, and either
    stops (none left, or the bench is empty) or edits the lineup per
    cfg.strategy and solves again. The bench shrinks by at least one
    every pass, so the loop runs at most 1 + bench-size iterations.

    Returns:
        AssociationResult. When the bench empties first, the remaining
        unacceptable matches are kept and reported with their cost.
    """
    n_det, n_trk = len(detections), len(tracks)
    order = sorted(range(n_det), key=lambda i: (-detections[i].score, i))
    considered = order[: cfg.max_candidates]
    lineup = list(considered[: cfg.top_k])
    bench = list(considered[cfg.top_k :])
    if n_det == 0 or n_trk == 0:
        # nothing to solve, but the lineup still takes the court
        return AssociationResult(
            [], list(range(n_det)), list(range(n_trk)), final_lineup=tuple(lineup)
        )
    det_arr = boxes_to_array([d.box for d in detections])
    track_arr = boxes_to_array(tracks)
    discarded: list[int] = []
    probes = 0
    iterations = 0
    while True:
        iterations += 1
        cost = pairwise_giou_loss(det_arr[lineup], track_arr)
        matched = [(r, c, float(cost[r, c])) for r, c in hungarian(cost)]
        bad = sorted(
            (m for m in matched if m[2] > cfg.accept_threshold),
            key=lambda m: (-m[2], m[0]),
        )
        if not bad or not bench:
            break
        # a candidate is good when it can acceptably partner some track
        # that currently lacks one; the re-solve routes it there
        needy = track_arr[[m[1] for m in bad]]

        def fits(det_idx: int) -> bool:
            best = pairwise_giou_loss(det_arr[det_idx : det_idx + 1], needy).min()
            return float(best) <= cfg.accept_threshold

        plan = apply_strategy([m[0] for m in bad], bench, cfg.strategy, good=fits)
        probes += plan.probes
        if not plan.delete_rows:
            # nobody on the bench can cure a bad pairing; keep them
            break
        for row, det_idx in zip(plan.delete_rows, plan.insert_items):
            discarded.append(lineup[row])
            lineup[row] = det_idx
            bench.remove(det_idx)
        # slots beyond the substitutes collapse and their tracks free up
        for row in sorted(plan.delete_rows[len(plan.insert_items) :], reverse=True):
            discarded.append(lineup[row])
            del lineup[row]

    matches = sorted((lineup[r], c, v) for r, c, v in matched)
    matched_dets = {m[0] for m in matches}
    matched_trks = {m[1] for m in matches}
    return AssociationResult(
        matches=matches,
        unmatched_detections=[i for i in range(n_det) if i not in matched_dets],
        unmatched_tracks=[j for j in range(n_trk) if j not in matched_trks],
        rally_iterations=iterations,
        probes=probes,
        final_lineup=tuple(lineup),
        discarded=tuple(discarded),
    )


def plain_hungarian_associate(
    detections: Sequence[Detection], tracks: Sequence[BBox], accept_threshold: float = 1.0
) -> AssociationResult:
    """One-shot Hungarian over every detection against every track.

    Matches costing more than accept_threshold are dropped to the
    unmatched lists. The whole detection list counts as the lineup.
    """
    n_det, n_trk = len(detections), len(tracks)
    if n_det == 0 or n_trk == 0:
        return AssociationResult(
            [], list(range(n_det)), list(range(n_trk)), final_lineup=tuple(range(n_det))
        )
    cost = pairwise_giou_loss(boxes_to_array([d.box for d in detections]), boxes_to_array(tracks))
    matches = [
        (r, c, float(cost[r, c])) for r, c in hungarian(cost) if cost[r, c] <= accept_threshold
    ]
    matched_dets = {m[0] for m in matches}
    matched_trks = {m[1] for m in matches}
    return AssociationResult(
        matches=matches,
        unmatched_detections=[i for i in range(n_det) if i not in matched_dets],
        unmatched_tracks=[j for j in range(n_trk) if j not in matched_trks],
        rally_iterations=1,
        probes=0,
        final_lineup=tuple(range(n_det)),
    )
