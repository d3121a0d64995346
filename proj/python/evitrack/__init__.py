"""Deterministic scoring, evidence math, attention ops, and the
detect/track simulator, backed by the C++ core."""

from ._core import (
    box_loss,
    box_loss_grad,
    dirichlet_predict,
    edl_loss,
    edl_loss_grad,
    iou,
    judge,
    rdm_forward,
    run_experiment_json,
    scaled_attention,
    score_sequence,
    stage_shapes,
)

__all__ = [
    "box_loss",
    "box_loss_grad",
    "dirichlet_predict",
    "edl_loss",
    "edl_loss_grad",
    "iou",
    "judge",
    "rdm_forward",
    "run_experiment_json",
    "scaled_attention",
    "score_sequence",
    "stage_shapes",
]
