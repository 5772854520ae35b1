"""Command-line surface tying the pipeline together.

Subcommands: synthesize, calibrate, estimate, sample-params, gen-dataset,
eval-kl, train.  Every command is deterministic given its flags and seeds,
embeds provenance (seed, stream index, configs) in its outputs, writes
files atomically, and reports failures as a single machine-parsable line
``CODE: message`` on stderr with exit status 2 (validation) or 3
(internal).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import calibration, metrics, oracle, synthetic
from .calibration import CameraModel, ParamSet
from .errors import (
    ConfigurationError,
    DomainError,
    InsufficientDataError,
    RawNoiseError,
)
from .estimator import (
    EstimatorCheckpoint,
    EstimatorConfig,
    estimate as estimate_with_checkpoint,
    train as train_estimator,
)
from .io import Manifest, atomic_write_text, read_tensor, write_tensor
from .noise_core import NoiseParams, as_patch, synthesize_noise
from .streams import derive_stream

PARAM_CSV_HEADER = ["image_id", "K", "sigma", "mu_c", "sigma_r"]

# Stream index used for scene generation in `train` (patch streams use the
# running patch index; see streams.derive_stream).
SCENE_STREAM = 4

TRAIN_EXTRA_KEYS = ("cameras", "scene_pool_size", "white_level", "out_checkpoint", "out_log")


def _fmt(value: float) -> str:
    """Shortest round-trip decimal form; keeps CSV output byte-stable."""
    return repr(float(value))


def _load_params_arg(value: str) -> NoiseParams:
    """Accept either a JSON file path or an inline JSON object."""
    text = value.strip()
    if not text.startswith("{"):
        text = Path(value).read_text("utf-8")
    try:
        record = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DomainError(f"noise parameters are not valid JSON: {exc}") from exc
    return NoiseParams.from_dict(record)


def _load_camera(path) -> CameraModel:
    try:
        record = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise DomainError(f"camera model file is not valid JSON: {exc}") from exc
    return CameraModel.from_dict(record)


def _save_camera(path, model: CameraModel) -> None:
    atomic_write_text(Path(path), json.dumps(model.as_dict(), sort_keys=True, indent=2) + "\n")


def _save_json(path, record: dict) -> None:
    atomic_write_text(Path(path), json.dumps(record, sort_keys=True, indent=2) + "\n")


def _params_csv_rows(rows: list[list[str]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(PARAM_CSV_HEADER)
    writer.writerows(rows)
    return buffer.getvalue()


def _append_params_csv(path, image_id: str, params: NoiseParams) -> None:
    """Append one estimate row, rewriting the file atomically."""
    path = Path(path)
    rows: list[list[str]] = []
    if path.exists():
        with path.open(newline="") as handle:
            reader = csv.reader(handle)
            header = next(reader, None)
            if header != PARAM_CSV_HEADER:
                raise DomainError(f"{path} does not carry the parameter CSV header")
            rows = [row for row in reader if row]
    rows.append(
        [image_id, _fmt(params.K), _fmt(params.sigma), _fmt(params.mu_c), _fmt(params.sigma_r)]
    )
    atomic_write_text(path, _params_csv_rows(rows))


# ----------------------------------------------------------------------
# synthesize


def _cmd_synthesize(args) -> int:
    clean = as_patch(read_tensor(args.clean))
    params = _load_params_arg(args.params)
    rng = derive_stream(args.seed, args.stream_index)
    noisy, _ = synthesize_noise(clean, params, rng)
    extensions = {}
    if args.clamp:
        noisy = np.clip(noisy, 0.0, args.white_level)
        extensions = {"clamp": True, "white_level": args.white_level}
    write_tensor(args.out, noisy)
    Manifest(
        camera_id=args.camera_id,
        params=params,
        seed=args.seed,
        stream_index=args.stream_index,
        extensions=extensions,
    ).save(Path(args.out).with_suffix(".json"))
    return 0


# ----------------------------------------------------------------------
# calibrate


def _read_estimates_csv(path) -> tuple[ParamSet, list[tuple[float, float]]]:
    path = Path(path)
    entries = []
    iso_pairs = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or header[: len(PARAM_CSV_HEADER)] != PARAM_CSV_HEADER:
            raise DomainError(
                f"{path} must start with header {','.join(PARAM_CSV_HEADER)}"
            )
        has_iso = len(header) > len(PARAM_CSV_HEADER) and header[len(PARAM_CSV_HEADER)] == "iso"
        for row in reader:
            if not row:
                continue
            image_id, k, sigma, mu_c, sigma_r = row[:5]
            params = NoiseParams(
                K=float(k), sigma=float(sigma), mu_c=float(mu_c), sigma_r=float(sigma_r)
            )
            entries.append((image_id, params))
            if has_iso and len(row) > 5 and row[5] != "":
                iso_pairs.append((float(row[5]), float(k)))
    if len(entries) < 2:
        raise InsufficientDataError(f"{path} holds {len(entries)} estimate row(s); need >= 2")
    return ParamSet(entries), iso_pairs


def _cmd_calibrate(args) -> int:
    params, iso_pairs = _read_estimates_csv(args.estimates)
    model = calibration.fit_log_linear(params)
    if iso_pairs:
        model = CameraModel.from_dict(
            {**model.as_dict(), "alpha": calibration.fit_iso_gain(iso_pairs)}
        )
    _save_camera(args.out, model)
    print(
        f"fit over {len(params)} estimates: "
        f"a={model.a:.6g} b={model.b:.6g} sigma_hat={model.sigma_hat:.6g} | "
        f"a_r={model.a_r:.6g} b_r={model.b_r:.6g} sigma_r_hat={model.sigma_r_hat:.6g} | "
        f"K in [{model.K_min:.6g}, {model.K_max:.6g}]"
        + (f" | alpha={model.alpha:.6g}" if model.alpha is not None else "")
    )
    return 0


# ----------------------------------------------------------------------
# estimate


def _read_flat_series(root) -> list[tuple[float, list[np.ndarray]]]:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"flat-series directory {root} does not exist")
    series = []
    for level_dir in sorted(p for p in root.iterdir() if p.is_dir()):
        clean_path = level_dir / "clean.nraw"
        if not clean_path.exists():
            raise InsufficientDataError(f"{level_dir} has no clean.nraw level reference")
        level = float(read_tensor(clean_path).mean())
        frames = [read_tensor(p) for p in sorted(level_dir.glob("noisy_*.nraw"))]
        if not frames:
            raise InsufficientDataError(f"{level_dir} holds no noisy frames")
        series.append((level, frames))
    if not series:
        raise InsufficientDataError(f"{root} holds no level directories")
    return series


def _read_dark_frames(root) -> list[np.ndarray]:
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dark-frame directory {root} does not exist")
    frames = [read_tensor(p) for p in sorted(root.glob("noisy_*.nraw"))]
    if not frames:
        raise InsufficientDataError(f"{root} holds no noisy frames")
    return frames


def _cmd_estimate(args) -> int:
    if args.oracle:
        if not args.flat_series or not args.dark:
            raise ConfigurationError("oracle mode needs --flat-series and --dark")
        params = oracle.estimate_params_oracle(
            _read_flat_series(args.flat_series), _read_dark_frames(args.dark)
        )
        source = "oracle"
    else:
        if not args.input or not args.checkpoint:
            raise ConfigurationError("checkpoint mode needs --input and --checkpoint")
        checkpoint = EstimatorCheckpoint.load(args.checkpoint)
        params = estimate_with_checkpoint(as_patch(read_tensor(args.input)), checkpoint)
        source = "checkpoint"
    record = {**params.as_dict(), "image_id": args.image_id, "source": source}
    _save_json(args.out, record)
    if args.append:
        _append_params_csv(args.append, args.image_id, params)
    return 0


# ----------------------------------------------------------------------
# sample-params


def _cmd_sample_params(args) -> int:
    model = _load_camera(args.camera)
    rng = derive_stream(args.seed, 0)
    rows = []
    for i in range(args.count):
        if args.iso is not None:
            params = calibration.sample_params_at_iso(model, args.iso, rng)
        else:
            params = calibration.sample_params(model, rng)
        rows.append(
            [
                f"sample_{i:05d}",
                _fmt(params.K),
                _fmt(params.sigma),
                _fmt(params.mu_c),
                _fmt(params.sigma_r),
            ]
        )
    atomic_write_text(Path(args.out), _params_csv_rows(rows))
    _save_json(
        str(args.out) + ".provenance.json",
        {
            "command": "sample-params",
            "camera": model.as_dict(),
            "count": args.count,
            "seed": args.seed,
            "iso": args.iso,
        },
    )
    return 0


# ----------------------------------------------------------------------
# gen-dataset


def _cmd_gen_dataset(args) -> int:
    out = Path(args.out)
    provenance = {
        "command": "gen-dataset",
        "mode": args.mode,
        "seed": args.seed,
        "count": args.count,
        "height": args.height,
        "width": args.width,
        "white_level": args.white_level,
    }
    if args.mode == "train":
        if not args.camera:
            raise ConfigurationError("train mode needs at least one --camera")
        cameras = [(Path(p).stem, _load_camera(p)) for p in args.camera]
        _save_json(
            out / "dataset.json",
            {**provenance, "cameras": {name: model.as_dict() for name, model in cameras}},
        )
        for i in range(args.count):
            rng = derive_stream(args.seed, i)
            scene = synthetic.make_scene(rng, args.height, args.width, args.white_level)
            camera_id, camera = cameras[rng.integers(len(cameras))]
            params = calibration.sample_params(camera, rng)
            noisy, _ = synthesize_noise(scene, params, rng)
            write_tensor(out / "clean" / f"patch_{i:05d}.nraw", scene)
            write_tensor(out / "noisy" / f"patch_{i:05d}.nraw", noisy)
            Manifest(
                camera_id=camera_id, params=params, seed=args.seed, stream_index=i
            ).save(out / "noisy" / f"patch_{i:05d}.json")
        return 0

    params = _load_params_arg(args.params) if args.params else None
    if params is None:
        raise ConfigurationError(f"{args.mode} mode needs --params")
    shape = (4, args.height, args.width)
    if args.mode == "flat":
        levels = [float(v) for v in args.levels.split(",")] if args.levels else []
        if not levels:
            raise ConfigurationError("flat mode needs --levels, e.g. --levels 2,8,32,128")
        if any(level < 0 for level in levels):
            raise DomainError("flat levels must be non-negative")
        _save_json(
            out / "dataset.json", {**provenance, "params": params.as_dict(), "levels": levels}
        )
        index = 0
        for j, level in enumerate(levels):
            level_dir = out / f"level_{j:02d}"
            write_tensor(level_dir / "clean.nraw", np.full(shape, level))
            for k in range(args.count):
                rng = derive_stream(args.seed, index)
                noisy, _ = synthesize_noise(np.full(shape, level), params, rng)
                write_tensor(level_dir / f"noisy_{k:04d}.nraw", noisy)
                Manifest(
                    camera_id=args.camera_id, params=params, seed=args.seed, stream_index=index
                ).save(level_dir / f"noisy_{k:04d}.json")
                index += 1
        return 0

    # dark mode: zero illumination
    _save_json(out / "dataset.json", {**provenance, "params": params.as_dict()})
    write_tensor(out / "clean.nraw", np.zeros(shape))
    for k in range(args.count):
        rng = derive_stream(args.seed, k)
        noisy, _ = synthesize_noise(np.zeros(shape), params, rng)
        write_tensor(out / f"noisy_{k:04d}.nraw", noisy)
        Manifest(
            camera_id=args.camera_id, params=params, seed=args.seed, stream_index=k
        ).save(out / f"noisy_{k:04d}.json")
    return 0


# ----------------------------------------------------------------------
# eval-kl


def _cmd_eval_kl(args) -> int:
    real = read_tensor(args.real)
    synth = read_tensor(args.synth)
    if args.clean:
        clean = read_tensor(args.clean)
        if clean.shape != real.shape or clean.shape != synth.shape:
            raise DomainError("--clean shape must match both inputs")
        real = real - clean
        synth = synth - clean
    if args.range:
        value_range = (args.range[0], args.range[1])
    else:
        value_range = metrics.default_range(real, synth)
    hist_real = metrics.build_histogram(real, bins=args.bins, value_range=value_range)
    hist_synth = metrics.build_histogram(synth, bins=args.bins, value_range=value_range)
    print(json.dumps(metrics.score_record(hist_real, hist_synth), sort_keys=True))
    return 0


# ----------------------------------------------------------------------
# train


def _cmd_train(args) -> int:
    try:
        record = json.loads(Path(args.config).read_text("utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"training config is not valid JSON: {exc}") from exc
    if not isinstance(record, dict):
        raise ConfigurationError("training config must be a JSON object")

    extras = {key: record.pop(key) for key in TRAIN_EXTRA_KEYS if key in record}
    if "cameras" not in extras or not extras["cameras"]:
        raise ConfigurationError("training config needs a non-empty 'cameras' list")
    if "out_checkpoint" not in extras:
        raise ConfigurationError("training config needs 'out_checkpoint'")
    config = EstimatorConfig.from_dict(record)

    bank = [_load_camera(path) for path in extras["cameras"]]
    scene_rng = derive_stream(config.seed, SCENE_STREAM)
    scene_pool = synthetic.make_scene_pool(
        scene_rng,
        int(extras.get("scene_pool_size", 64)),
        config.patch_height,
        config.patch_width,
        float(extras.get("white_level", synthetic.DEFAULT_WHITE_LEVEL)),
    )

    checkpoint = train_estimator(config, scene_pool, bank)
    checkpoint.save(extras["out_checkpoint"])

    log_path = Path(extras.get("out_log", str(extras["out_checkpoint"]) + ".losses.csv"))
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["stage", "epoch", "contrastive", "regression", "total"])
    for row in checkpoint.metadata.get("loss_log", []):
        writer.writerow(
            [
                row["stage"],
                row["epoch"],
                _fmt(row["contrastive"]),
                _fmt(row["regression"]),
                _fmt(row["total"]),
            ]
        )
    atomic_write_text(log_path, buffer.getvalue())
    print(
        f"checkpoint written to {extras['out_checkpoint']} "
        f"(final total loss {checkpoint.metadata['final_losses']['total']:.6g})"
    )
    return 0


# ----------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(f"USAGE: {message}", file=sys.stderr)
        raise SystemExit(2)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rawnoise", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synthesize", help="corrupt a clean patch with the full noise model")
    p.add_argument("--clean", required=True, help="clean NRAW tensor")
    p.add_argument("--params", required=True, help="NoiseParams JSON file or inline object")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--stream-index", type=int, default=0, help="per-patch stream index")
    p.add_argument("--out", required=True, help="noisy NRAW output")
    p.add_argument("--clamp", action="store_true", help="clamp output to [0, white level]")
    p.add_argument("--white-level", type=float, default=synthetic.DEFAULT_WHITE_LEVEL)
    p.add_argument("--camera-id", default="unknown")
    p.set_defaults(func=_cmd_synthesize)

    p = sub.add_parser("calibrate", help="fit a camera model from per-image estimates")
    p.add_argument("--estimates", required=True, help="CSV: image_id,K,sigma,mu_c,sigma_r[,iso]")
    p.add_argument("--out", required=True, help="camera model JSON output")
    p.set_defaults(func=_cmd_calibrate)

    p = sub.add_parser("estimate", help="estimate noise parameters for one image")
    p.add_argument("--input", help="noisy NRAW tensor (checkpoint mode)")
    p.add_argument("--checkpoint", help="NEST checkpoint (checkpoint mode)")
    p.add_argument("--oracle", action="store_true", help="statistical mode from frame sets")
    p.add_argument("--flat-series", help="directory of level_*/ flat frames (oracle mode)")
    p.add_argument("--dark", help="directory of dark frames (oracle mode)")
    p.add_argument("--out", required=True, help="NoiseParams JSON output")
    p.add_argument("--append", help="also append a row to this estimates CSV")
    p.add_argument("--image-id", default="image")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("sample-params", help="sample parameter tuples from a camera model")
    p.add_argument("--camera", required=True, help="camera model JSON")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="CSV output")
    p.add_argument("--iso", type=float, help="pin the gain via the fitted ISO slope")
    p.set_defaults(func=_cmd_sample_params)

    p = sub.add_parser("gen-dataset", help="produce clean/noisy tensor trees with manifests")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--mode", choices=("train", "flat", "dark"), default="train")
    p.add_argument("--count", type=int, required=True, help="patches (train) or frames per level")
    p.add_argument("--camera", action="append", help="camera model JSON (train mode; repeatable)")
    p.add_argument("--params", help="NoiseParams JSON file or inline (flat/dark modes)")
    p.add_argument("--levels", help="comma-separated clean levels (flat mode)")
    p.add_argument("--height", type=int, default=64)
    p.add_argument("--width", type=int, default=64)
    p.add_argument("--white-level", type=float, default=synthetic.DEFAULT_WHITE_LEVEL)
    p.add_argument("--camera-id", default="synthetic")
    p.set_defaults(func=_cmd_gen_dataset)

    p = sub.add_parser("eval-kl", help="histogram KL divergence between two sample files")
    p.add_argument("--real", required=True, help="reference NRAW tensor")
    p.add_argument("--synth", required=True, help="candidate NRAW tensor")
    p.add_argument("--bins", type=int, default=metrics.DEFAULT_BINS)
    p.add_argument("--range", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--clean", help="subtract this clean tensor from both inputs")
    p.set_defaults(func=_cmd_eval_kl)

    p = sub.add_parser("train", help="train the contrastive estimator from a config JSON")
    p.add_argument("--config", required=True, help="estimator config + training data spec")
    p.set_defaults(func=_cmd_train)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except RawNoiseError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"FILE_NOT_FOUND: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - defensive
        print(f"INTERNAL: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
