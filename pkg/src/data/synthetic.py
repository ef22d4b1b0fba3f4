# ==============================================
# Synthetic lesion generator
# ==============================================
#
# Desk-scale stand-in for the dermoscopy archive.
#
# - Background: skin tone with a per-image tint and
#   Gaussian pixel noise.
# - Positives (even index): one dark, irregular,
#   rotated ellipse whose tight bounding box is kept.
# - Negatives (odd index): background only, labeled
#   nevus / seborrheic keratosis alternately.
#
# Every sample draws from default_rng([seed, index])
# so the set is bit-identical for a given seed.
#
# ==============================================

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .contracts import BoundingBox, Label3, Manifest, ManifestRow, Sample
from .images import save_png
from .manifest import BBOX_SUFFIX, MANIFEST_NAME, load_manifest, write_bbox, write_manifest

logger = logging.getLogger(__name__)

MIN_SAMPLES = 8
MIN_IMAGE_SIZE = 16

SKIN_TONE = (224.0, 172.0, 140.0)
LESION_TONE = (90.0, 55.0, 40.0)
TINT_JITTER = 12.0
LESION_JITTER = 10.0
NOISE_SIGMA = 8.0
SEMI_AXIS_RANGE = (0.15, 0.30)
CENTER_RANGE = (0.35, 0.65)
BORDER_WOBBLE = 0.15


@dataclass
class SyntheticDataset:
    samples: list[Sample]
    image_size: int
    seed: int

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def manifest(self) -> Manifest:
        """In-memory manifest; paths are the file names ``write_synthetic`` uses."""
        return Manifest([ManifestRow(s.id, Path(f"{s.id}.png"), s.label3) for s in self.samples])

    @property
    def bboxes(self) -> dict[str, BoundingBox]:
        return {s.id: s.bbox for s in self.samples if s.bbox is not None}


def _lesion_mask(rng: np.random.Generator, size: int) -> np.ndarray:
    cy, cx = rng.uniform(*CENTER_RANGE, size=2) * size
    a, b = rng.uniform(*SEMI_AXIS_RANGE, size=2) * size
    theta = rng.uniform(0.0, np.pi)
    lobes = int(rng.integers(3, 7))
    phase = rng.uniform(0.0, 2.0 * np.pi)

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64) + 0.5
    dx, dy = xx - cx, yy - cy
    u = dx * np.cos(theta) + dy * np.sin(theta)
    v = -dx * np.sin(theta) + dy * np.cos(theta)
    radius = np.hypot(u / a, v / b)
    angle = np.arctan2(v / b, u / a)
    return radius <= 1.0 + BORDER_WOBBLE * np.sin(lobes * angle + phase)


def _make_sample(seed: int, index: int, size: int) -> Sample:
    rng = np.random.default_rng([seed, index])
    tone = np.asarray(SKIN_TONE) + rng.uniform(-TINT_JITTER, TINT_JITTER, size=3)
    image = tone + rng.normal(0.0, NOISE_SIGMA, size=(size, size, 3))

    bbox = None
    if index % 2 == 0:
        label3 = Label3.MELANOMA
        mask = _lesion_mask(rng, size)
        lesion = np.asarray(LESION_TONE) + rng.uniform(-LESION_JITTER, LESION_JITTER, size=3)
        image[mask] = lesion + rng.normal(0.0, NOISE_SIGMA, size=(int(mask.sum()), 3))
        ys, xs = np.nonzero(mask)
        bbox = BoundingBox(int(xs.min()), int(ys.min()), int(xs.max()) + 1, int(ys.max()) + 1)
    else:
        label3 = Label3.NEVUS if (index // 2) % 2 == 0 else Label3.SEBORRHEIC_KERATOSIS

    pixels = np.clip(np.rint(image), 0, 255).astype(np.uint8)
    return Sample(id=f"SYN_{index:05d}", image=pixels, label3=label3, bbox=bbox)


def synth_dataset(n: int, image_size: int, seed: int) -> SyntheticDataset:
    """Generate ``n`` balanced samples (half melanoma) of size ``image_size``."""
    if n < MIN_SAMPLES or n % 2:
        raise ValueError(f"n must be an even number ≥ {MIN_SAMPLES}, got {n}")
    if image_size < MIN_IMAGE_SIZE:
        raise ValueError(f"image_size must be ≥ {MIN_IMAGE_SIZE}, got {image_size}")
    if seed < 0:
        raise ValueError(f"seed must be non-negative, got {seed}")
    samples = [_make_sample(seed, i, image_size) for i in range(n)]
    logger.info("Synthesised %d samples at %d×%d (seed=%d)", n, image_size, image_size, seed)
    return SyntheticDataset(samples=samples, image_size=image_size, seed=seed)


def write_synthetic(dataset: SyntheticDataset, out_dir: str | Path) -> Manifest:
    """Write ``manifest.csv``, ``<id>.png`` and ``<id>.bbox`` under ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for sample in dataset.samples:
        save_png(sample.image, out / f"{sample.id}.png")
        if sample.bbox is not None:
            write_bbox(out / f"{sample.id}{BBOX_SUFFIX}", sample.bbox)
    write_manifest(dataset.manifest, out / MANIFEST_NAME)
    logger.info("Wrote %d synthetic samples to %s", len(dataset), out)
    return load_manifest(out / MANIFEST_NAME, out)
