"""Multi-object tracking for team sports.

Players on a court look alike, move abruptly, and get reported twice by
detectors under occlusion. This toolkit attacks both ends: a duplicate
detection decontaminator built on the pairwise GIoU-loss matrix, and a
lineup-with-substitutions association loop over the Hungarian solver,
plus the tracking driver, CLEAR-style metrics, MOT CSV I/O and a seeded
scenario generator to exercise it all. The CLI lives in teamtrack.cli.
"""

__version__ = "0.1.0"

from .assignment import brute_force_assignment, hungarian
from .association import (
    STRATEGIES,
    AssociationResult,
    Detection,
    ReplacementPlan,
    RhConfig,
    apply_strategy,
    match_cost_matrix,
    plain_hungarian_associate,
    rally_hungarian,
    split_lineup,
)
from .decontaminator import (
    MODES,
    DecontaminatorConfig,
    decontaminate,
    detect_duplicates,
    duplicate_loss,
    duplicate_loss_grad,
    self_giou_matrix,
    suppress_duplicates,
    total_boxes_loss,
)
from .geometry import (
    BBox,
    BoxGrad,
    InvalidBoxError,
    array_to_boxes,
    boxes_to_array,
    enclosing_box,
    giou,
    giou_loss,
    giou_loss_grad,
    iou,
    pairwise_giou_loss,
    pairwise_iou,
)
from .metrics import DatasetStats, EvalResult, dataset_stats, evaluate
from .motio import FrameRecord, MotFormatError, group_by_frame, parse_mot_csv, write_mot_csv
from .synth import RNG_NAME, ScenarioConfig, generate
from .tracker import StepStats, Track, Tracker, TrackerConfig, run_sequence

__all__ = [
    "__version__",
    "BBox",
    "BoxGrad",
    "InvalidBoxError",
    "iou",
    "enclosing_box",
    "giou",
    "giou_loss",
    "giou_loss_grad",
    "pairwise_iou",
    "pairwise_giou_loss",
    "boxes_to_array",
    "array_to_boxes",
    "hungarian",
    "brute_force_assignment",
    "MODES",
    "DecontaminatorConfig",
    "self_giou_matrix",
    "detect_duplicates",
    "duplicate_loss",
    "total_boxes_loss",
    "duplicate_loss_grad",
    "decontaminate",
    "suppress_duplicates",
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
    "Track",
    "TrackerConfig",
    "StepStats",
    "Tracker",
    "run_sequence",
    "EvalResult",
    "DatasetStats",
    "evaluate",
    "dataset_stats",
    "MotFormatError",
    "FrameRecord",
    "parse_mot_csv",
    "write_mot_csv",
    "group_by_frame",
    "RNG_NAME",
    "ScenarioConfig",
    "generate",
]
