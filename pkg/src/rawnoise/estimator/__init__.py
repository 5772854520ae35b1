"""Learned single-image noise parameter estimation (contrastive training)."""

from .checkpoint import EstimatorCheckpoint
from .config import ConvStage, EstimatorConfig
from .losses import (
    contrastive_loss,
    inverse_param_transform,
    param_transform_r,
)
from .network import EstimatorNetwork, parameter_shapes
from .train import (
    backward,
    estimate,
    evaluate_triplets,
    forward,
    heldout_weighted_mse,
    mean_r_baseline_mse,
    predict_r,
    total_loss,
    train,
)
from .triplets import Triplet, TripletBatch, augment_triplet, make_triplet_batch

__all__ = [
    "ConvStage",
    "EstimatorCheckpoint",
    "EstimatorConfig",
    "EstimatorNetwork",
    "Triplet",
    "TripletBatch",
    "augment_triplet",
    "backward",
    "contrastive_loss",
    "estimate",
    "evaluate_triplets",
    "forward",
    "heldout_weighted_mse",
    "inverse_param_transform",
    "make_triplet_batch",
    "mean_r_baseline_mse",
    "param_transform_r",
    "parameter_shapes",
    "predict_r",
    "total_loss",
    "train",
]
