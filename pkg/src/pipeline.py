"""
==============================================
Pipeline: the operator workflows end to end
==============================================

Each function here is one CLI subcommand minus argument parsing. They
return plain dicts that the CLI prints as a JSON line.

USAGE EXAMPLES:

1. Synthesize a desk-scale dataset:
    from src.pipeline import run_synth
    run_synth(n=64, size=32, seed=7, out_dir="d/")

2. Train and save a checkpoint (+ history CSV, + best-val checkpoint):
    from src.pipeline import TrainOptions, run_train
    from src.training import TrainConfig
    result = run_train(TrainOptions("d/", "model.bin", TrainConfig(epochs=50)))
    print(result.summary)

3. Evaluate / predict:
    run_eval("d/", "model.bin")
    run_predict("lesion.png", "model.bin", cam=True)
"""

from __future__ import annotations

import base64
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np

from src.data import (
    ImageSet,
    Manifest,
    compute_channel_means,
    decode_image,
    inverse_frequency_weights,
    load_bboxes,
    load_image,
    load_image_set,
    load_manifest,
    split,
    synth_dataset,
    write_synthetic,
)
from src.data.manifest import MANIFEST_NAME
from src.explain import gradcam, write_heatmap_grid
from src.model import Model, ModelConfig, SkipMode, build_model, predict_proba
from src.persistence import load_versioned, save
from src.service import predict_bytes, prepare_image
from src.tensor import Tensor
from src.training import History, TrainConfig, evaluate, fit

logger = logging.getLogger(__name__)

DEFAULT_LAYER_CHANNELS = (16, 32, 64)
MAX_NATIVE_SIZE = 224
FALLBACK_SIZE = 224


# ── dataset helpers ───────────────────────────────────────────────────────────

def load_dataset_manifest(
    data_dir: str | Path, manifest_path: Optional[str | Path] = None
) -> Manifest:
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise FileNotFoundError(f"data directory not found: {data_dir}")
    csv_path = Path(manifest_path) if manifest_path else data_dir / MANIFEST_NAME
    return load_manifest(csv_path, data_dir)


def native_input_size(manifest: Manifest) -> int:
    """The first image's side if it is square, divisible by 8 and ≤ 224; else 224."""
    if len(manifest) == 0:
        return FALLBACK_SIZE
    h, w = load_image(manifest.rows[0].path).shape[:2]
    if h == w and h % 8 == 0 and h <= MAX_NATIVE_SIZE:
        return h
    return FALLBACK_SIZE


def history_path(checkpoint: str | Path) -> Path:
    return Path(checkpoint).with_suffix(".history.csv")


def best_checkpoint_path(checkpoint: str | Path) -> Path:
    return Path(checkpoint).with_suffix(".best.bin")


# ── synth ─────────────────────────────────────────────────────────────────────

def run_synth(n: int, size: int, seed: int, out_dir: str | Path) -> dict[str, Any]:
    dataset = synth_dataset(n, size, seed)
    manifest = write_synthetic(dataset, out_dir)
    return {
        "out": str(out_dir),
        "n": len(manifest),
        "positives": manifest.positives,
        "size": size,
        "seed": seed,
    }


# ── train ─────────────────────────────────────────────────────────────────────

@dataclass
class TrainOptions:
    data_dir: Path
    out_checkpoint: Path
    train: TrainConfig = field(default_factory=TrainConfig)
    dense_skips: bool = False
    auto_class_weights: bool = False
    manifest_path: Optional[Path] = None
    val_dir: Optional[Path] = None
    train_fraction: float = 0.8
    input_size: Optional[int] = None
    layer_channels: tuple[int, int, int] = DEFAULT_LAYER_CHANNELS


@dataclass
class TrainResult:
    model: Model
    history: History
    model_version: str
    summary: dict[str, Any]


def _load_sets(opts: TrainOptions) -> tuple[ImageSet, ImageSet, int]:
    manifest = load_dataset_manifest(opts.data_dir, opts.manifest_path)
    if opts.val_dir is not None:
        train_m, val_m = manifest, load_dataset_manifest(opts.val_dir)
    else:
        train_m, val_m = split(manifest, opts.train_fraction, opts.train.seed)
    size = opts.input_size or native_input_size(train_m)
    train_set = load_image_set(train_m, size, load_bboxes(train_m, opts.data_dir))
    val_dir = opts.val_dir or opts.data_dir
    val_set = load_image_set(val_m, size, load_bboxes(val_m, val_dir))
    return train_set, val_set, size


def run_train(opts: TrainOptions) -> TrainResult:
    train_set, val_set, size = _load_sets(opts)
    cfg = opts.train
    if opts.auto_class_weights:
        cfg = replace(cfg, class_weights=inverse_frequency_weights(train_set.labels))
    cfg.validate()

    model_cfg = ModelConfig(
        input_size=size,
        layer_channels=opts.layer_channels,
        skip_mode=SkipMode.DENSE if opts.dense_skips else SkipMode.CONSECUTIVE,
    ).validate()
    model = build_model(model_cfg, cfg.seed)
    model.channel_means = compute_channel_means(train_set.images)

    logger.info(
        "Training on %d images (%d positive), validating on %d, input %d×%d, %s skips",
        len(train_set), train_set.positives, len(val_set), size, size, model_cfg.skip_mode.value,
    )
    model, history = fit(model, train_set, val_set, cfg, best_checkpoint_path(opts.out_checkpoint))

    nbytes = save(model, opts.out_checkpoint)
    history.to_csv(history_path(opts.out_checkpoint))
    _, version = load_versioned(opts.out_checkpoint)

    train_loss, train_acc = evaluate(model, train_set)
    val_loss, val_acc = evaluate(model, val_set)
    summary = {
        "checkpoint": str(opts.out_checkpoint),
        "model_version": version,
        "bytes": nbytes,
        "epochs": len(history),
        "n_train": len(train_set),
        "n_val": len(val_set),
        "train_loss": train_loss,
        "train_accuracy": train_acc,
        "val_loss": val_loss,
        "val_accuracy": val_acc,
    }
    return TrainResult(model=model, history=history, model_version=version, summary=summary)


# ── eval / predict ────────────────────────────────────────────────────────────

def run_eval(
    data_dir: str | Path, checkpoint: str | Path, manifest_path: Optional[str | Path] = None
) -> dict[str, Any]:
    model, version = load_versioned(checkpoint)
    manifest = load_dataset_manifest(data_dir, manifest_path)
    if len(manifest) == 0:
        raise ValueError(f"no images listed for {data_dir}")
    dataset = load_image_set(manifest, model.config.input_size)
    loss, accuracy = evaluate(model, dataset)
    return {"loss": loss, "accuracy": accuracy, "n": len(dataset), "model_version": version}


def run_predict(
    image_path: str | Path,
    checkpoint: str | Path,
    cam: bool = False,
    out_overlay: Optional[str | Path] = None,
    out_heatmap: Optional[str | Path] = None,
) -> dict[str, Any]:
    model, version = load_versioned(checkpoint)
    body = Path(image_path).read_bytes()
    response = predict_bytes(model, body, cam or out_overlay is not None, version)
    result = response.model_dump(exclude_none=True)

    if out_overlay is not None:
        Path(out_overlay).write_bytes(base64.b64decode(result.pop("heatmap_png")))
        result["overlay_path"] = str(out_overlay)
    if out_heatmap is not None:
        _, x = prepare_image(model, decode_image(body))
        s = model.config.input_size
        proba = predict_proba(model, Tensor.wrap(x.data.reshape(1, 3, s, s))).data[0]
        target = int(np.argmax(proba))
        write_heatmap_grid(gradcam(model, x, target), out_heatmap)
        result["heatmap_path"] = str(out_heatmap)
    return result
