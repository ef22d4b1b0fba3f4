#!/usr/bin/env python3
"""Run the desk-scale acceptance checks end-to-end.

synthesize → train (fit) → evaluate on held-out samples → Grad-CAM
localization → checkpoint round trip.

Usage:
  python scripts/run_desk_acceptance.py
  python scripts/run_desk_acceptance.py --epochs 120 --seed 7
"""

from __future__ import annotations

import argparse
import sys
import tempfile
import time
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.config import configure_logging  # noqa: E402
from src.data import ImageSet, compute_channel_means, normalize_batch, synth_dataset  # noqa: E402
from src.explain import gradcam  # noqa: E402
from src.model import ModelConfig, build_model, forward  # noqa: E402
from src.persistence import load, save  # noqa: E402
from src.tensor import Tensor  # noqa: E402
from src.training import TrainConfig, evaluate, fit  # noqa: E402

# ── Pretty-print helpers ──────────────────────────────────────────────────────

_failures = 0


def _section(title: str) -> None:
    """Print a bold section banner."""
    bar = "─" * 60
    print(f"\n{bar}")
    print(f"  {title}")
    print(bar)


def _check(condition: bool, label: str) -> None:
    """Print a PASS / FAIL line for a named assertion."""
    global _failures
    symbol = "PASS" if condition else "FAIL"
    if not condition:
        _failures += 1
    print(f"  [{symbol}]  {label}")


# ── Main ──────────────────────────────────────────────────────────────────────

def main() -> int:
    parser = argparse.ArgumentParser(description="Desk-scale acceptance run")
    parser.add_argument("--n", type=int, default=64)
    parser.add_argument("--size", type=int, default=32)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--val-seed", type=int, default=8)
    parser.add_argument("--epochs", type=int, default=200)
    args = parser.parse_args()
    configure_logging("WARNING")

    _section("1 · Synthesize")
    train_set = ImageSet.from_samples(synth_dataset(args.n, args.size, args.seed).samples)
    val_set = ImageSet.from_samples(synth_dataset(32, args.size, args.val_seed).samples)
    _check(train_set.positives == args.n // 2, f"{args.n} training samples, half melanoma")
    _check(len(val_set.bboxes) == 16, "16 held-out positives carry a lesion bounding box")

    _section("2 · Fit")
    model = build_model(ModelConfig(input_size=args.size), seed=args.seed)
    model.channel_means = compute_channel_means(train_set.images)
    start = time.perf_counter()
    cfg = TrainConfig(
        learning_rate=0.05, epochs=args.epochs, batch_size=16, seed=args.seed, augment=False
    )
    model, history = fit(model, train_set, val_set, cfg)
    print(f"  fit: {len(history)} epochs in {time.perf_counter() - start:.1f}s")
    _check(history[-1].train_acc >= 0.95, f"train accuracy {history[-1].train_acc:.3f} ≥ 0.95")
    _check(history[-1].train_loss < history[0].train_loss, "final loss below first-epoch loss")

    _section("3 · Held-out evaluation")
    _, val_acc = evaluate(model, val_set)
    _check(val_acc >= 0.90, f"held-out accuracy {val_acc:.3f} ≥ 0.90")

    _section("4 · Grad-CAM localization")
    positives = [i for i, y in enumerate(val_set.labels) if y == 1]
    batch = normalize_batch(val_set.images[positives], model.channel_means)
    hits = 0
    in_range = True
    for row, i in enumerate(positives):
        heat = gradcam(model, Tensor.wrap(batch.data[row]), target_class=1)
        in_range &= bool(heat.values.min() >= 0.0 and heat.values.max() <= 1.0)
        hits += heat.mass_fraction(val_set.bboxes[val_set.ids[i]], dilation=0.1) >= 0.6
    share = hits / len(positives)
    _check(in_range, "every heatmap lies in [0, 1]")
    _check(share >= 0.8, f"{hits}/{len(positives)} positives with ≥ 60% heat inside the box")

    _section("5 · Checkpoint round trip")
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "model.bin"
        nbytes = save(model, path)
        restored = load(path)
        before = forward(model, batch).data
        after = forward(restored, batch).data
        _check(np.array_equal(before, after), f"{nbytes}-byte checkpoint reproduces the logits")

    print(f"\n  {'ALL PASSED' if _failures == 0 else f'{_failures} FAILED'}")
    return 0 if _failures == 0 else 1


if __name__ == "__main__":
    raise SystemExit(main())
