"""Angular margin losses, verification metrics and face pipeline helpers."""

from ._lmcot import (
    Box,
    Gallery,
    LossConfig,
    angles_from_features,
    angular_loss,
    auc,
    check_examples,
    cot_via_identity,
    cot_via_theta,
    double_loss,
    eer,
    far_frr_sweep,
    gap,
    gradcheck,
    iou,
    loss_names,
    map_at_100,
    margin_sigmoid_ce,
    nms,
    pca2,
    run_cli,
    softmax_loss,
    train,
)

__all__ = [
    "Box",
    "Gallery",
    "LossConfig",
    "angles_from_features",
    "angular_loss",
    "auc",
    "check_examples",
    "cot_via_identity",
    "cot_via_theta",
    "double_loss",
    "eer",
    "far_frr_sweep",
    "gap",
    "gradcheck",
    "iou",
    "loss_names",
    "map_at_100",
    "margin_sigmoid_ce",
    "nms",
    "pca2",
    "run_cli",
    "softmax_loss",
    "train",
]
