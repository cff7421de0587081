"""Duplicate detection, the penalty and its gradient, descent, suppression."""

from __future__ import annotations

import numpy as np
import pytest

from teamtrack import (
    BBox,
    DecontaminatorConfig,
    Detection,
    decontaminate,
    detect_duplicates,
    duplicate_loss,
    duplicate_loss_grad,
    giou_loss,
    self_giou_matrix,
    suppress_duplicates,
    total_boxes_loss,
)

from helpers import central_difference, relative_error

LB = DecontaminatorConfig().lower_bound
LITERAL = DecontaminatorConfig()
REPULSIVE = DecontaminatorConfig(mode="repulsive")


def _near_duplicate_pair() -> tuple[BBox, BBox, float]:
    a = BBox(0.0, 0.0, 10.0, 10.0)
    b = BBox(0.0, 0.0, 10.04, 10.0)
    loss = giou_loss(a, b)
    assert 0.0 < loss < LB
    return a, b, loss


def _spread_cluster(rng: np.random.Generator, n: int, lower_bound: float) -> list[BBox]:
    """Boxes with several below-bound pairs, none near the membership edge."""
    while True:
        base = BBox(0.0, 0.0, 12.0, 20.0)
        boxes = [base]
        for _ in range(n - 1):
            dx, dy = rng.uniform(0.01, 0.6, size=2)
            boxes.append(base.translate(float(dx), float(dy)))
        m = self_giou_matrix(boxes)
        off_diag = m[~np.eye(n, dtype=bool)]
        if np.all(np.abs(off_diag - lower_bound) > 1e-3):
            return boxes


def test_matrix_is_symmetric_with_zero_diagonal() -> None:
    boxes = [BBox(0.0, 0.0, 2.0, 2.0), BBox(1.0, 1.0, 3.0, 3.0), BBox(5.0, 5.0, 6.0, 7.0)]
    m = self_giou_matrix(boxes)
    assert m.shape == (3, 3)
    assert np.array_equal(m, m.T)
    assert np.all(np.diag(m) == 0.0)
    assert np.all(m >= 0.0) and np.all(m < 2.0)


def test_matrix_single_box() -> None:
    assert self_giou_matrix([BBox(0.0, 0.0, 1.0, 1.0)]).tolist() == [[0.0]]


def test_matrix_identical_boxes_are_all_zero() -> None:
    b = BBox(3.0, 4.0, 5.0, 9.0)
    assert self_giou_matrix([b, b]).tolist() == [[0.0, 0.0], [0.0, 0.0]]


def test_matrix_entries_come_from_giou_loss() -> None:
    boxes = [BBox(0.0, 0.0, 2.0, 2.0), BBox(1.0, 1.0, 3.0, 3.0)]
    m = self_giou_matrix(boxes)
    assert m[0, 1] == pytest.approx(1.0 + 5.0 / 63.0, abs=1e-12)


def test_matrix_rejects_empty_input() -> None:
    with pytest.raises(ValueError):
        self_giou_matrix([])


def test_detect_duplicates_on_separated_boxes_is_empty() -> None:
    boxes = [BBox(0.0, 0.0, 1.0, 1.0), BBox(5.0, 5.0, 6.0, 6.0)]
    assert detect_duplicates(self_giou_matrix(boxes), LITERAL) == []


def test_detect_duplicates_flags_identical_boxes() -> None:
    b = BBox(0.0, 0.0, 4.0, 4.0)
    report = detect_duplicates(self_giou_matrix([b, b]), LITERAL)
    assert report == [(0, 1, 0.0)]


def test_detect_duplicates_picks_only_the_close_pair() -> None:
    a, b, loss = _near_duplicate_pair()
    far = BBox(30.0, 30.0, 40.0, 40.0)
    report = detect_duplicates(self_giou_matrix([a, b, far]), LITERAL)
    assert [(i, j) for i, j, _ in report] == [(0, 1)]
    assert report[0][2] == pytest.approx(loss, abs=1e-15)


def test_detect_duplicates_sorts_tightest_first() -> None:
    base = BBox(0.0, 0.0, 10.0, 10.0)
    boxes = [base, base.translate(0.02, 0.0), base.translate(0.3, 0.3)]
    cfg = DecontaminatorConfig(lower_bound=0.2)
    report = detect_duplicates(self_giou_matrix(boxes), cfg)
    losses = [v for _, _, v in report]
    assert losses == sorted(losses)
    assert report[0][:2] == (0, 1)


def test_duplicate_loss_literal_halves_the_pair_sum() -> None:
    a, b, loss = _near_duplicate_pair()
    m = self_giou_matrix([a, b])
    # the (i, j) and (j, i) copies sum to 2 * loss, halved back to loss
    assert duplicate_loss(m, LITERAL) == pytest.approx(loss, abs=1e-15)


def test_duplicate_loss_repulsive_is_the_gap_to_the_bound() -> None:
    a, b, loss = _near_duplicate_pair()
    m = self_giou_matrix([a, b])
    assert duplicate_loss(m, REPULSIVE) == pytest.approx(LB - loss, abs=1e-15)


def test_duplicate_loss_zero_without_active_pairs() -> None:
    boxes = [BBox(0.0, 0.0, 1.0, 1.0), BBox(9.0, 9.0, 11.0, 11.0)]
    m = self_giou_matrix(boxes)
    assert duplicate_loss(m, LITERAL) == 0.0
    assert duplicate_loss(m, REPULSIVE) == 0.0


def test_duplicate_loss_matches_double_sum_on_random_clusters() -> None:
    rng = np.random.default_rng(31)
    cfg = DecontaminatorConfig(lower_bound=0.3)
    for _ in range(100):
        boxes = _spread_cluster(rng, int(rng.integers(2, 7)), cfg.lower_bound)
        m = self_giou_matrix(boxes)
        n = len(boxes)
        direct = 0.5 * sum(
            m[i, j] for i in range(n) for j in range(n) if i != j and m[i, j] < cfg.lower_bound
        )
        assert duplicate_loss(m, cfg) == pytest.approx(direct, abs=1e-12)


def test_duplicate_loss_zero_iff_no_duplicates() -> None:
    rng = np.random.default_rng(32)
    cfg = DecontaminatorConfig(lower_bound=0.3)
    for _ in range(100):
        boxes = _spread_cluster(rng, 4, cfg.lower_bound)
        m = self_giou_matrix(boxes)
        empty = detect_duplicates(m, cfg) == []
        assert (duplicate_loss(m, cfg) == 0.0) == empty


def test_duplicate_loss_invariant_under_permutation() -> None:
    rng = np.random.default_rng(33)
    cfg = DecontaminatorConfig(lower_bound=0.3)
    boxes = _spread_cluster(rng, 6, cfg.lower_bound)
    perm = list(rng.permutation(len(boxes)))
    shuffled = [boxes[i] for i in perm]
    assert duplicate_loss(self_giou_matrix(shuffled), cfg) == pytest.approx(
        duplicate_loss(self_giou_matrix(boxes), cfg), abs=1e-12
    )


def test_total_boxes_loss_adds_the_penalty() -> None:
    a, b, loss = _near_duplicate_pair()
    m = self_giou_matrix([a, b])
    clean = self_giou_matrix([a, BBox(50.0, 50.0, 60.0, 60.0)])
    assert total_boxes_loss(1.5, clean, LITERAL) == 1.5
    assert total_boxes_loss(1.5, m, LITERAL) == pytest.approx(1.5 + loss, abs=1e-15)
    assert total_boxes_loss(0.0, m, LITERAL) == duplicate_loss(m, LITERAL)
    with pytest.raises(ValueError):
        total_boxes_loss(float("nan"), m, LITERAL)


def test_grad_zero_without_active_pairs() -> None:
    boxes = [BBox(0.0, 0.0, 1.0, 1.0), BBox(9.0, 9.0, 11.0, 11.0)]
    for g in duplicate_loss_grad(boxes, LITERAL):
        assert g.as_array().tolist() == [0.0, 0.0, 0.0, 0.0]


def test_grad_matches_finite_differences_in_both_modes() -> None:
    rng = np.random.default_rng(34)
    for mode in ("literal", "repulsive"):
        cfg = DecontaminatorConfig(lower_bound=0.3, mode=mode)
        for _ in range(60):
            boxes = _spread_cluster(rng, 4, cfg.lower_bound)
            analytic = np.concatenate([g.as_array() for g in duplicate_loss_grad(boxes, cfg)])

            def loss_of(flat: np.ndarray) -> float:
                moved = [BBox(*flat[4 * i : 4 * i + 4]) for i in range(len(boxes))]
                return duplicate_loss(self_giou_matrix(moved), cfg)

            x0 = np.concatenate([np.array(b.as_tuple()) for b in boxes])
            numeric = central_difference(loss_of, x0, h=1e-6)
            assert relative_error(analytic, numeric) < 1e-4


def test_repulsive_gradient_separates_the_pair() -> None:
    a, b, loss = _near_duplicate_pair()
    grads = duplicate_loss_grad([a, b], REPULSIVE)
    step = 1e-3
    moved_a = BBox(*(np.array(a.as_tuple()) - step * grads[0].as_array()))
    moved_b = BBox(*(np.array(b.as_tuple()) - step * grads[1].as_array()))
    assert giou_loss(moved_a, moved_b) > loss


def test_decontaminate_leaves_clean_input_untouched() -> None:
    boxes = [BBox(0.0, 0.0, 1.0, 1.0), BBox(5.0, 5.0, 6.0, 6.0)]
    moved, steps = decontaminate(boxes, REPULSIVE)
    assert moved == boxes
    assert steps == 0


def test_decontaminate_separates_a_near_identical_pair() -> None:
    a, b, _ = _near_duplicate_pair()
    moved, steps = decontaminate([a, b], REPULSIVE, step_size=0.5, max_steps=500)
    assert steps <= 500
    m = self_giou_matrix(moved)
    assert m[0, 1] >= LB
    assert detect_duplicates(m, REPULSIVE) == []


def test_decontaminate_separates_three_mutual_duplicates() -> None:
    base = BBox(0.0, 0.0, 10.0, 10.0)
    boxes = [base, base.translate(0.02, 0.0), base.translate(0.0, 0.02)]
    moved, _ = decontaminate(boxes, REPULSIVE, step_size=0.5, max_steps=500)
    m = self_giou_matrix(moved)
    n = len(moved)
    assert min(m[i, j] for i in range(n) for j in range(i + 1, n)) >= LB


def test_decontaminate_requires_repulsive_mode() -> None:
    with pytest.raises(ValueError):
        decontaminate([BBox(0.0, 0.0, 1.0, 1.0)], LITERAL)
    with pytest.raises(ValueError):
        decontaminate([BBox(0.0, 0.0, 1.0, 1.0)], REPULSIVE, step_size=0.0)


def test_config_validation() -> None:
    with pytest.raises(ValueError):
        DecontaminatorConfig(lower_bound=0.0)
    with pytest.raises(ValueError):
        DecontaminatorConfig(lower_bound=2.0)
    with pytest.raises(ValueError):
        DecontaminatorConfig(mode="attractive")


def test_suppress_drops_the_lower_scoring_member() -> None:
    a, b, _ = _near_duplicate_pair()
    keep = Detection(a, 0.9)
    drop = Detection(b, 0.5)
    far = Detection(BBox(30.0, 0.0, 40.0, 10.0), 0.3)
    assert suppress_duplicates([drop, keep, far], LB) == [keep, far]


def test_suppress_keeps_the_earlier_detection_on_score_ties() -> None:
    a, b, _ = _near_duplicate_pair()
    first = Detection(a, 0.7)
    second = Detection(b, 0.7)
    assert suppress_duplicates([first, second], LB) == [first]


def test_suppress_cascade_ignores_already_dropped_members() -> None:
    base = BBox(0.0, 0.0, 10.0, 10.0)
    a = Detection(base, 0.9)
    b = Detection(base.translate(0.01, 0.0), 0.8)
    c = Detection(base.translate(0.02, 0.0), 0.7)
    # tightest pair (a, b) drops b; the (b, c) pair is then moot and the
    # (a, c) pair drops c, leaving only the strongest detection
    assert suppress_duplicates([a, b, c], 0.2) == [a]


def test_suppress_passes_short_inputs_through() -> None:
    only = Detection(BBox(0.0, 0.0, 1.0, 1.0), 0.5)
    assert suppress_duplicates([], 0.011) == []
    assert suppress_duplicates([only], 0.011) == [only]
