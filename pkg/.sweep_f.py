"""Scratch sweep F: square nonlinearity and depth at 10+10 epochs."""
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
from rawnoise.estimator.network import parameter_shapes
from rawnoise.estimator.train import _generate_dataset
from rawnoise.streams import derive_stream

bank = synthetic.default_camera_bank()


def run(tag, stages, epochs=10, lr=3e-3, scale=1 / 64.0, seed=11):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=stages,
        feature_dim=2 * stages[-1].width, projector=(64, 32), head=(64, 4),
        learning_rate=lr, batch_size=32, epochs_per_stage=epochs,
        train_triplets=2000, seed=seed, input_scale=scale,
    )
    n = sum(int(np.prod(s)) for s in parameter_shapes(cfg).values())
    scenes = synthetic.make_scene_pool(derive_stream(seed, 4), 64, 32, 32)
    heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 500)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(seed, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    print(
        f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
        f"mse_ratio={mse/base:.3f} params={n} ({time.time()-t0:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    run(
        "sq first      ",
        (ConvStage(3, 2, 16, "square"), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
    )
    run(
        "depth4        ",
        (ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64), ConvStage(3, 1, 64)),
    )
    run(
        "sq + depth4   ",
        (
            ConvStage(3, 2, 16, "square"),
            ConvStage(3, 2, 32),
            ConvStage(3, 2, 64),
            ConvStage(3, 1, 64),
        ),
    )
    run(
        "lr5e-3        ",
        (ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
        lr=5e-3,
    )
