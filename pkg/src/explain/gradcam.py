"""
Gradient-weighted class activation maps over the last parameter layer.

For target class c and the last layer's post-ReLU activation A (C×h×w):

    α_k  = mean over (i, j) of ∂y_c / ∂A_k[i, j]
    raw  = ReLU( Σ_k α_k · A_k )
    map  = bilinear_upsample(raw, S) / max(raw)      (all zeros if max(raw) == 0)

Each call records on its own tape, so concurrent calls against one shared
model never interfere.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from src.data import BoundingBox, resize_bilinear
from src.model import Model, forward_with_activations
from src.nn import Mode
from src.tensor import GradTape, ShapeError, Tensor, backward, elementwise, reduce

HEATMAP_TAG = "P-HEAT"
BLUE = np.array([0.0, 0.0, 255.0])
RED = np.array([255.0, 0.0, 0.0])


@dataclass(frozen=True)
class Heatmap:
    values: np.ndarray  # S×S, in [0, 1]
    target_class: int
    raw_max: float

    @property
    def size(self) -> int:
        return int(self.values.shape[0])

    def mass_fraction(self, bbox: BoundingBox, dilation: float = 0.1) -> float:
        """Share of total heatmap mass inside ``bbox`` grown by ``dilation``·S per side."""
        total = float(self.values.sum())
        if total == 0.0:
            return 0.0
        box = bbox.dilate(dilation * self.size, self.size)
        return float(self.values[box.y0 : box.y1, box.x0 : box.x1].sum()) / total


def gradcam(model: Model, image: Tensor, target_class: int) -> Heatmap:
    """Heatmap for one preprocessed 3×S×S (or 1×3×S×S) image."""
    num_classes = model.config.num_classes
    if not 0 <= target_class < num_classes:
        raise ValueError(f"target_class {target_class} out of range [0, {num_classes})")
    s = model.config.input_size
    if image.shape not in ((3, s, s), (1, 3, s, s)):
        raise ShapeError(f"gradcam expects a 3×{s}×{s} image, got {image.shape}", image.shape)

    x = Tensor.wrap(image.data.reshape(1, 3, s, s))
    onehot = np.zeros((1, num_classes), dtype=x.dtype)
    onehot[0, target_class] = 1
    with GradTape() as tape:
        tape.watch(x)
        logits, activations = forward_with_activations(model, x, Mode.INFER)
        score = reduce("sum", elementwise("mul", logits, Tensor.wrap(onehot)))
    last = activations[-1]
    grads = backward(score, tape, sources=[last])

    a = last.data[0].astype(np.float64)
    alpha = grads[last].data[0].astype(np.float64).mean(axis=(1, 2))
    raw = np.maximum(np.tensordot(alpha, a, axes=1), 0.0)
    raw_max = float(raw.max())

    if raw_max == 0.0:
        values = np.zeros((s, s), dtype=np.float64)
    else:
        upsampled = np.full((s, s), raw[0, 0]) if raw.shape[0] < 2 else resize_bilinear(raw, s)
        values = np.clip(upsampled / raw_max, 0.0, 1.0)
    return Heatmap(values=values, target_class=target_class, raw_max=raw_max)


def colormap(h: np.ndarray) -> np.ndarray:
    """Linear blue (h = 0) to red (h = 1); returns h.shape + (3,) floats."""
    h = np.asarray(h, dtype=np.float64)[..., None]
    return (1.0 - h) * BLUE + h * RED


def overlay(original: np.ndarray, heatmap: Heatmap, alpha: float = 0.5) -> np.ndarray:
    """out = (1 − α·h)·orig + α·h·colormap(h), rounded to uint8."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if original.shape != heatmap.values.shape + (3,):
        raise ValueError(
            f"image shape {original.shape} does not match heatmap {heatmap.values.shape}"
        )
    weight = alpha * heatmap.values[..., None]
    blended = (1.0 - weight) * original.astype(np.float64) + weight * colormap(heatmap.values)
    return np.clip(np.rint(blended), 0, 255).astype(np.uint8)


def write_heatmap_grid(heatmap: Heatmap, path: str | Path) -> None:
    s = heatmap.size
    np.savetxt(path, heatmap.values, fmt="%.9g", header=f"{HEATMAP_TAG} {s} {s}", comments="")


def read_heatmap_grid(path: str | Path) -> np.ndarray:
    with open(path, "r", encoding="ascii") as f:
        tag, rows, cols = f.readline().split()
        if tag != HEATMAP_TAG:
            raise ValueError(f"{path} is not a heatmap grid (tag '{tag}')")
        values = np.loadtxt(f, dtype=np.float64, ndmin=2)
    if values.shape != (int(rows), int(cols)):
        raise ValueError(f"{path}: header says {rows}×{cols}, found {values.shape}")
    return values
