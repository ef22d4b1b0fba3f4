"""Resize, mean subtraction and channel-mean estimation."""

from __future__ import annotations

import logging
from typing import Iterable, Sequence

import numpy as np

from src.tensor import Tensor

from .contracts import Manifest, PreprocessConfig
from .images import load_image

logger = logging.getLogger(__name__)


def _axis_taps(n_in: int, n_out: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # half-pixel centres, clamped at the borders
    pos = (np.arange(n_out, dtype=np.float64) + 0.5) * (n_in / n_out) - 0.5
    pos = np.clip(pos, 0.0, n_in - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_in - 1)
    return lo, hi, pos - lo


def resize_bilinear(image: np.ndarray, target: int | tuple[int, int] = 224) -> np.ndarray:
    """Bilinear resize of an H×W or H×W×C array to ``target``.

    uint8 input is rounded back to uint8; float input keeps its dtype.
    """
    if image.ndim not in (2, 3):
        raise ValueError(f"expected H×W or H×W×C image, got shape {image.shape}")
    out_h, out_w = (target, target) if isinstance(target, int) else target
    in_h, in_w = image.shape[:2]
    if in_h < 2 or in_w < 2:
        raise ValueError(f"source image must be at least 2×2, got {in_h}×{in_w}")
    if out_h <= 0 or out_w <= 0:
        raise ValueError(f"target size must be positive, got {out_h}×{out_w}")

    src = image.astype(np.float64, copy=False)
    trailing = (1,) * (src.ndim - 1)

    r_lo, r_hi, r_f = _axis_taps(in_h, out_h)
    r_f = r_f.reshape(-1, *trailing)
    rows = src[r_lo] * (1.0 - r_f) + src[r_hi] * r_f

    c_lo, c_hi, c_f = _axis_taps(in_w, out_w)
    c_f = c_f.reshape(1, -1, *trailing[1:])
    out = rows[:, c_lo] * (1.0 - c_f) + rows[:, c_hi] * c_f

    if image.dtype == np.uint8:
        return np.clip(np.rint(out), 0, 255).astype(np.uint8)
    return out.astype(image.dtype, copy=False)


def normalize(image: np.ndarray, cfg: PreprocessConfig) -> Tensor:
    """u8 H×W×3 → 3×S×S float tensor of value/255 − channel mean."""
    s = cfg.target_size
    if image.shape != (s, s, 3):
        raise ValueError(f"normalize expects a {s}×{s}×3 image, got {image.shape}")
    scaled = image.astype(np.float64) / 255.0 - np.asarray(cfg.channel_means, dtype=np.float64)
    return Tensor.wrap(np.ascontiguousarray(scaled.transpose(2, 0, 1), dtype=np.float32))


def normalize_batch(
    images: np.ndarray | Sequence[np.ndarray], channel_means: Sequence[float]
) -> Tensor:
    """N×S×S×3 uint8 → N×3×S×S tensor."""
    batch = np.asarray(images)
    if batch.ndim != 4 or batch.shape[3] != 3:
        raise ValueError(f"expected N×S×S×3 images, got shape {batch.shape}")
    scaled = batch.astype(np.float64) / 255.0 - np.asarray(channel_means, dtype=np.float64)
    return Tensor.wrap(np.ascontiguousarray(scaled.transpose(0, 3, 1, 2), dtype=np.float32))


def compute_channel_means(source: Manifest | Iterable[np.ndarray]) -> tuple[float, float, float]:
    """Per-channel mean of value/255 over every pixel of every image.

    Accepts a manifest (images are decoded) or already-decoded arrays.
    """
    images: Iterable[np.ndarray]
    if isinstance(source, Manifest):
        images = (load_image(row.path) for row in source)
    else:
        images = source

    totals = np.zeros(3, dtype=np.float64)
    pixels = 0
    for image in images:
        if image.ndim != 3 or image.shape[2] != 3:
            raise ValueError(f"expected H×W×3 image, got shape {image.shape}")
        totals += image.reshape(-1, 3).sum(axis=0, dtype=np.float64)
        pixels += image.shape[0] * image.shape[1]
    if pixels == 0:
        raise ValueError("cannot compute channel means of an empty image set")

    means = totals / (255.0 * pixels)
    logger.info("Channel means over %d pixels: (%.4f, %.4f, %.4f)", pixels, *means)
    return (float(means[0]), float(means[1]), float(means[2]))
