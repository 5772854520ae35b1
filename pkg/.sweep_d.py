"""Scratch sweep D: stack improvements for margin above the 0.9 bar."""
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


def run(tag, epochs=10, tau=0.1, widths=(16, 32, 64), pool=64, patch=32, proj=(64, 32)):
    cfg = EstimatorConfig(
        patch_height=patch, patch_width=patch,
        extractor=tuple(ConvStage(3, 2, w) for w in widths),
        feature_dim=2 * widths[-1], projector=proj, head=(64, 4),
        learning_rate=3e-3, tau=tau, batch_size=32, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=1 / 64.0,
    )
    scenes = synthetic.make_scene_pool(derive_stream(11, 4), pool, patch, patch)
    heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    print(
        f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
        f"mse_ratio={mse/base:.3f} ({time.time()-t0:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    run("pool128       ", pool=128)
    run("tau.07        ", tau=0.07)
    run("pool128 tau.07", pool=128, tau=0.07)
    run("wide24/48/96  ", widths=(24, 48, 96), pool=128)
    run("patch40       ", patch=40, pool=128)
