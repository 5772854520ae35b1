"""Scratch sweep: short runs to pick toy training hyperparameters."""
import itertools
import sys
import time

import numpy as np

from rawnoise import synthetic
from rawnoise.estimator import (
    ConvStage,
    EstimatorConfig,
    evaluate_triplets,
    heldout_weighted_mse,
    mean_r_baseline_mse,
    make_triplet_batch,
    train,
)
from rawnoise.estimator.train import _generate_dataset
from rawnoise.streams import derive_stream


def run(tag, epochs=10, lr=1e-3, tau=0.1, scale=1 / 1023.0, batch=32, widths=(16, 32, 64)):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=tuple(ConvStage(3, 2, w) for w in widths),
        feature_dim=2 * widths[-1], projector=(64, 32), head=(64, 4),
        learning_rate=lr, tau=tau, batch_size=batch, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=scale,
    )
    scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
    bank = synthetic.default_camera_bank()
    heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    last = ck.metadata["loss_log"][-1]
    print(
        f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
        f"mse_ratio={mse/base:.3f} c_loss={last['contrastive']:.2f} "
        f"({time.time()-t0:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    which = sys.argv[1]
    if which == "a":
        run("base  lr1e-3", epochs=10)
        run("lr3e-3       ", epochs=10, lr=3e-3)
        run("lr1e-2       ", epochs=10, lr=1e-2)
    elif which == "b":
        run("lr3e-3 tau.2 ", epochs=10, lr=3e-3, tau=0.2)
        run("lr3e-3 sc1/64", epochs=10, lr=3e-3, scale=1 / 64.0)
        run("lr3e-3 b64   ", epochs=10, lr=3e-3, batch=64)
