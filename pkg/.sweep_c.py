"""Scratch sweep C: step count and camera-bank diversity."""
import time

import numpy as np

from rawnoise import synthetic
from rawnoise.calibration import CameraModel
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


def wide_bank(sh=0.22, srh=0.28):
    base = synthetic.default_camera_bank()
    return [
        CameraModel.from_dict({**m.as_dict(), "sigma_hat": sh, "sigma_r_hat": srh})
        for m in base
    ]


def run(tag, epochs=10, lr=3e-3, tau=0.1, batch=32, scale=1 / 64.0, bank=None):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=(ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
        feature_dim=128, projector=(64, 32), head=(64, 4),
        learning_rate=lr, tau=tau, batch_size=batch, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=scale,
    )
    scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
    bank = bank if bank is not None else synthetic.default_camera_bank()
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
        f"mse_ratio={mse/base:.3f} c_loss={last['contrastive']:.2f} ({time.time()-t0:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    run("batch16        ", batch=16)
    run("widebank       ", bank=wide_bank())
    run("b16 + widebank ", batch=16, bank=wide_bank())
    run("b16 wb sc1/32  ", batch=16, bank=wide_bank(), scale=1 / 32.0)
