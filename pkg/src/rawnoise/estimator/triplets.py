"""Triplet augmentation for contrastive training.

A triplet is built entirely synthetically: a parameter tuple drawn from a
random camera corrupts two different clean scenes (anchor and positive,
same parameters, independent noise and scenes), while a freshly drawn
tuple corrupts a third scene (negative).  Scenes are drawn independently
precisely so the representation cannot key on scene content.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..calibration import sample_params
from ..errors import ConfigurationError, DomainError
from ..noise_core import NoiseParams, synthesize_noise


@dataclass(frozen=True)
class Triplet:
    """One anchor/positive/negative element with its generating tuples."""

    anchor: np.ndarray
    positive: np.ndarray
    negative: np.ndarray
    anchor_params: NoiseParams
    negative_params: NoiseParams


@dataclass(frozen=True)
class TripletBatch:
    """Stacked triplets: arrays shaped (B, 4, H, W) plus parameter lists."""

    anchors: np.ndarray
    positives: np.ndarray
    negatives: np.ndarray
    anchor_params: tuple
    negative_params: tuple

    def __post_init__(self):
        sizes = {
            self.anchors.shape[0],
            self.positives.shape[0],
            self.negatives.shape[0],
            len(self.anchor_params),
            len(self.negative_params),
        }
        if len(sizes) != 1:
            raise DomainError("triplet batch stacks must share one size")

    def __len__(self) -> int:
        return self.anchors.shape[0]


def augment_triplet(scene_pool, camera_bank, rng: np.random.Generator) -> Triplet:
    """Draw one triplet; redraws the negative tuple on exact collision."""
    if not scene_pool:
        raise ConfigurationError("scene pool is empty")
    if not camera_bank:
        raise ConfigurationError("camera bank is empty")

    camera = camera_bank[rng.integers(len(camera_bank))]
    params = sample_params(camera, rng)

    anchor, _ = synthesize_noise(scene_pool[rng.integers(len(scene_pool))], params, rng)
    positive, _ = synthesize_noise(scene_pool[rng.integers(len(scene_pool))], params, rng)

    for _ in range(100):
        neg_camera = camera_bank[rng.integers(len(camera_bank))]
        neg_params = sample_params(neg_camera, rng)
        if neg_params != params:
            break
    else:
        # only reachable with a fully degenerate bank (single point mass)
        raise ConfigurationError("camera bank cannot produce a distinct negative tuple")
    negative, _ = synthesize_noise(scene_pool[rng.integers(len(scene_pool))], neg_params, rng)

    return Triplet(
        anchor=anchor,
        positive=positive,
        negative=negative,
        anchor_params=params,
        negative_params=neg_params,
    )


def make_triplet_batch(
    scene_pool, camera_bank, rng: np.random.Generator, size: int
) -> TripletBatch:
    """Stack ``size`` independently augmented triplets."""
    if size < 1:
        raise ConfigurationError(f"batch size must be >= 1, got {size}")
    triplets = [augment_triplet(scene_pool, camera_bank, rng) for _ in range(size)]
    return TripletBatch(
        anchors=np.stack([t.anchor for t in triplets]),
        positives=np.stack([t.positive for t in triplets]),
        negatives=np.stack([t.negative for t in triplets]),
        anchor_params=tuple(t.anchor_params for t in triplets),
        negative_params=tuple(t.negative_params for t in triplets),
    )


def slice_batch(batch: TripletBatch, indices) -> TripletBatch:
    """Sub-batch along the triplet axis (used for epoch shuffling)."""
    indices = np.asarray(indices)
    return TripletBatch(
        anchors=batch.anchors[indices],
        positives=batch.positives[indices],
        negatives=batch.negatives[indices],
        anchor_params=tuple(batch.anchor_params[i] for i in indices),
        negative_params=tuple(batch.negative_params[i] for i in indices),
    )
