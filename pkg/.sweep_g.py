"""Scratch sweep G: patch size at 10+10 epochs."""
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
    param_transform_r,
    train,
)
from rawnoise.estimator.network import EstimatorNetwork
from rawnoise.estimator.train import _generate_dataset, _stacked
from rawnoise.streams import derive_stream

bank = synthetic.default_camera_bank()


def run(tag, patch, epochs=10, lr=3e-3):
    cfg = EstimatorConfig(
        patch_height=patch, patch_width=patch,
        extractor=(ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
        feature_dim=128, projector=(64, 32), head=(64, 4),
        learning_rate=lr, batch_size=32, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=1 / 64.0,
    )
    scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, patch, patch)
    heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 500)
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    dt = time.time() - t0
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    net = EstimatorNetwork(cfg, ck.params)
    _, z, _, _ = net.forward_batch(_stacked(heldout))
    n = len(heldout)
    unit = z / np.linalg.norm(z, axis=1, keepdims=True)
    correct = np.sum(unit[:n] * unit[n : 2 * n], 1) > np.sum(unit[:n] * unit[2 * n :], 1)
    dist = np.array(
        [
            np.linalg.norm(param_transform_r(a) - param_transform_r(g))
            for a, g in zip(heldout.anchor_params, heldout.negative_params)
        ]
    )
    med = np.median(dist)
    print(
        f"{tag}: acc={ev['accuracy']:.3f} (close {correct[dist<med].mean():.3f} / "
        f"far {correct[dist>=med].mean():.3f}) mse_ratio={mse/base:.3f} ({dt:.0f}s)",
        flush=True,
    )


if __name__ == "__main__":
    run("patch48", 48)
    run("patch64", 64)
