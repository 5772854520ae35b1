"""Scratch probe: does the toy training hit the acceptance targets?"""
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
from rawnoise.estimator.checkpoint import EstimatorCheckpoint
from rawnoise.estimator.network import EstimatorNetwork
from rawnoise.streams import derive_stream

cfg = EstimatorConfig(
    patch_height=32, patch_width=32,
    extractor=(ConvStage(3, 2, 16), ConvStage(3, 2, 32), ConvStage(3, 2, 64)),
    feature_dim=128, projector=(64, 32), head=(64, 4),
    learning_rate=1e-3, batch_size=32, epochs_per_stage=30,
    train_triplets=2000, seed=11, input_scale=1 / 1023.0,
)
scenes = synthetic.make_scene_pool(derive_stream(11, 4), 64, 32, 32)
bank = synthetic.default_camera_bank()

heldout = make_triplet_batch(scenes, bank, derive_stream(999, 0), 300)

init_net = EstimatorNetwork.initialize(cfg)
init_ck = EstimatorCheckpoint(config=cfg, params=init_net.params)
init_eval = evaluate_triplets(init_ck, heldout)
print("init:", init_eval, flush=True)

t0 = time.time()
ck = train(cfg, scenes, bank)
print(f"train time: {time.time()-t0:.0f}s", flush=True)

final_eval = evaluate_triplets(ck, heldout)
mse = heldout_weighted_mse(ck, heldout)
baseline = mean_r_baseline_mse(
    [p for p in ck_params] if (ck_params := None) else
    [p for p in (t for t in [])], heldout.anchor_params
) if False else None

# Baseline uses the training-set anchor params: regenerate the training tuples
from rawnoise.estimator.train import _generate_dataset

train_ds = _generate_dataset(cfg, scenes, bank, derive_stream(cfg.seed, 1))
baseline = mean_r_baseline_mse(train_ds.anchor_params, heldout.anchor_params)
print("final:", final_eval, flush=True)
print(f"heldout weighted MSE: {mse:.4f}  baseline: {baseline:.4f}  ratio: {mse/baseline:.4f}", flush=True)
print("loss log tail:", ck.metadata["loss_log"][-3:], flush=True)
