"""Full-length probes: schedules and width for margin + stability."""
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


def run(tag, lr, decay_epochs=50, decay_factor=10.0, widths=(16, 32, 64)):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=tuple(ConvStage(3, 2, w) for w in widths),
        feature_dim=2 * widths[-1], projector=(64, 32), head=(64, 4),
        learning_rate=lr, decay_epochs=decay_epochs, decay_factor=decay_factor,
        batch_size=32, epochs_per_stage=30,
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
    print(
        f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
        f"mse_ratio={mse/base:.3f} ({time.time()-t0:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    run("lr3e-3 step20/3", 3e-3, decay_epochs=20, decay_factor=3.0)
    run("lr2e-3 flat    ", 2e-3)
    run("wide lr3e-3 s20", 3e-3, decay_epochs=20, decay_factor=3.0, widths=(24, 48, 96))
