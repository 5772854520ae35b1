"""Winning-config confirmation: true heldout accuracy + variants."""
import time

import numpy as np

from rawnoise import synthetic
from rawnoise.estimator import (
    ConvStage,
    EstimatorConfig,
    evaluate_triplets,
    heldout_weighted_mse,
    make_triplet_batch,
    mean_r_baseline_mse,
    train,
)
from rawnoise.estimator.train import _generate_dataset
from rawnoise.streams import derive_stream

bank = synthetic.default_camera_bank()


def full(tag, pool=64, seed=11):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=(ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
        feature_dim=128, projector=(64, 32), head=(64, 4),
        learning_rate=3e-3, batch_size=32, epochs_per_stage=30,
        train_triplets=2000, seed=seed, input_scale=1 / 64.0,
    )
    scenes = synthetic.make_scene_pool(derive_stream(seed, 4), pool, 32, 32)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    dt = time.time() - t0
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(seed, 1))
    for hseed in (999, 577, 1234):
        held = make_triplet_batch(scenes, bank, derive_stream(hseed, 0), 500)
        ev = evaluate_triplets(ck, held)
        mse = heldout_weighted_mse(ck, held)
        base = mean_r_baseline_mse(tr.anchor_params, held.anchor_params)
        print(
            f"{tag} heldout{hseed}: acc={ev['accuracy']:.3f} "
            f"sep={ev['separation']:.3f} mse_ratio={mse/base:.3f} ({dt:.0f}s)",
            flush=True,
        )


if __name__ == "__main__":
    full("base pool64 s11")
    full("pool128 s11", pool=128)
    full("base pool64 s12", seed=12)
