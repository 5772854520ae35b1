"""Full 30+30 candidates with fixed scenes + wide bank."""
import time
import numpy as np
from rawnoise import synthetic
from rawnoise.estimator import (ConvStage, EstimatorConfig, evaluate_triplets,
    heldout_weighted_mse, make_triplet_batch, mean_r_baseline_mse, param_transform_r, train)
from rawnoise.estimator.network import EstimatorNetwork
from rawnoise.estimator.train import _generate_dataset, _stacked
from rawnoise.streams import derive_stream

scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
bank = synthetic.default_camera_bank()
heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)

for lr in (1e-3, 3e-3):
    cfg = EstimatorConfig(
        patch_height=32, patch_width=32,
        extractor=(ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
        feature_dim=128, projector=(64, 32), head=(64, 4),
        learning_rate=lr, batch_size=32, epochs_per_stage=30,
        train_triplets=2000, seed=11, input_scale=1 / 64.0,
    )
    t0 = time.time()
    ck = train(cfg, scenes, bank)
    ev = evaluate_triplets(ck, heldout)
    mse = heldout_weighted_mse(ck, heldout)
    tr = _generate_dataset(cfg, scenes, bank, derive_stream(11, 1))
    base = mean_r_baseline_mse(tr.anchor_params, heldout.anchor_params)
    # accuracy by pair difficulty
    net = EstimatorNetwork(cfg, ck.params)
    _, z, _, _ = net.forward_batch(_stacked(heldout))
    n = len(heldout)
    unit = z / np.linalg.norm(z, axis=1, keepdims=True)
    correct = np.sum(unit[:n]*unit[n:2*n],1) > np.sum(unit[:n]*unit[2*n:],1)
    dist = np.array([np.linalg.norm(param_transform_r(a)-param_transform_r(g))
                     for a, g in zip(heldout.anchor_params, heldout.negative_params)])
    med = np.median(dist)
    print(f"lr={lr:g}: acc={ev['accuracy']:.3f} (close {correct[dist<med].mean():.3f} / far {correct[dist>=med].mean():.3f}) "
          f"sep={ev['separation']:.3f} mse_ratio={mse/base:.3f} ({time.time()-t0:.0f}s)", flush=True)
