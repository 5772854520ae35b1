"""Scratch sweep E: pooling support via final stride."""
import time
import numpy as np
from rawnoise import synthetic
from rawnoise.estimator import (ConvStage, EstimatorConfig, evaluate_triplets,
    heldout_weighted_mse, make_triplet_batch, mean_r_baseline_mse, train)
from rawnoise.estimator.train import _generate_dataset
from rawnoise.streams import derive_stream

bank = synthetic.default_camera_bank()

def run(tag, strides, epochs=10, lr=3e-3, widths=(16, 32, 64)):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=tuple(ConvStage(3, s, w) for s, w in zip(strides, widths)),
        feature_dim=2 * widths[-1], projector=(64, 32), head=(64, 4),
        learning_rate=lr, batch_size=32, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=1 / 64.0,
    )
    scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
    heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    print(f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
          f"mse_ratio={mse/base:.3f} ({time.time()-t0:.0f}s)", flush=True)

if __name__ == "__main__":
    run("strides 2,2,1", (2, 2, 1))
    run("strides 2,1,2", (2, 1, 2))
    run("strides 1,2,2", (1, 2, 2))
