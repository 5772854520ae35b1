"""Scratch sweep B: temperature / capacity / batch / diagnostics."""
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

scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
bank = synthetic.default_camera_bank()
heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)


def run(tag, epochs=10, lr=1e-3, tau=0.1, batch=32, widths=(16, 32, 64), pool=None, diag=False):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=tuple(ConvStage(3, 2, w) for w in widths),
        feature_dim=2 * widths[-1], projector=(64, 32), head=(64, 4),
        learning_rate=lr, tau=tau, batch_size=batch, epochs_per_stage=epochs,
        train_triplets=2000, seed=11, input_scale=1 / 1023.0,
    )
    sc = pool if pool is not None else scenes
    t0 = time.time()
    ck = train(cfg, sc, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, sc, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    last = ck.metadata["loss_log"][-1]
    print(
        f"{tag}: acc={ev['accuracy']:.3f} sep={ev['separation']:.3f} "
        f"mse_ratio={mse/base:.3f} c_loss={last['contrastive']:.2f} ({time.time()-t0:.0f}s)",
        flush=True,
    )
    if diag:
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
            f"  diag: acc|close={correct[dist < med].mean():.3f} "
            f"acc|far={correct[dist >= med].mean():.3f} "
            f"q10(dist)={np.quantile(dist, 0.1):.2f} med={med:.2f}",
            flush=True,
        )


if __name__ == "__main__":
    run("tau.05       ", tau=0.05)
    run("tau.03       ", tau=0.03)
    run("wide 24/48/96", widths=(24, 48, 96))
    run("batch64      ", batch=64)
    run("diag base    ", diag=True)
