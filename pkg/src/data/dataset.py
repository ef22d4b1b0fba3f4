"""In-memory image sets: decoded, resized, labeled."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .contracts import BoundingBox, Manifest, ManifestRow, Sample
from .images import load_image
from .preprocess import resize_bilinear

logger = logging.getLogger(__name__)


@dataclass
class ImageSet:
    """N×S×S×3 uint8 images with binary labels; bboxes are in resized coordinates."""

    ids: list[str]
    images: np.ndarray
    labels: np.ndarray
    bboxes: dict[str, BoundingBox] = field(default_factory=dict)

    def __post_init__(self) -> None:
        n = len(self.ids)
        if self.images.shape[0] != n or self.labels.shape[0] != n:
            raise ValueError(
                f"ImageSet sizes disagree: {n} ids, {self.images.shape[0]} images, "
                f"{self.labels.shape[0]} labels"
            )
        if n and (self.images.ndim != 4 or self.images.shape[3] != 3):
            raise ValueError(f"images must be N×S×S×3, got {self.images.shape}")

    def __len__(self) -> int:
        return len(self.ids)

    @property
    def image_size(self) -> int:
        return int(self.images.shape[1])

    @property
    def positives(self) -> int:
        return int(self.labels.sum())

    def subset(self, indices: Sequence[int]) -> "ImageSet":
        idx = list(indices)
        ids = [self.ids[i] for i in idx]
        return ImageSet(
            ids=ids,
            images=self.images[idx],
            labels=self.labels[idx],
            bboxes={k: self.bboxes[k] for k in ids if k in self.bboxes},
        )

    @classmethod
    def from_samples(cls, samples: Sequence[Sample], size: Optional[int] = None) -> "ImageSet":
        images, boxes = [], {}
        for s in samples:
            native = s.image.shape[1]
            target = size or native
            same = s.image.shape[:2] == (target, target)
            images.append(s.image if same else resize_bilinear(s.image, target))
            if s.bbox is not None:
                boxes[s.id] = s.bbox if target == native else s.bbox.scale(target / native)
        return cls(
            ids=[s.id for s in samples],
            images=np.stack(images) if images else np.zeros((0, size or 0, size or 0, 3), np.uint8),
            labels=np.array([s.label for s in samples], dtype=np.int64),
            bboxes=boxes,
        )


def _load_row(row: ManifestRow, size: int) -> tuple[np.ndarray, float]:
    image = load_image(row.path)
    factor = size / image.shape[1]
    if image.shape[:2] != (size, size):
        image = resize_bilinear(image, size)
    return image, factor


def load_image_set(
    manifest: Manifest,
    size: int,
    bboxes: Optional[dict[str, BoundingBox]] = None,
    workers: int = 4,
) -> ImageSet:
    """Decode and resize every manifest image; output order follows the manifest."""
    rows = list(manifest)
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        loaded = list(pool.map(lambda r: _load_row(r, size), rows))

    scaled: dict[str, BoundingBox] = {}
    for row, (_, factor) in zip(rows, loaded):
        if bboxes and row.id in bboxes:
            box = bboxes[row.id]
            scaled[row.id] = box if factor == 1.0 else box.scale(factor)

    if loaded:
        images = np.stack([img for img, _ in loaded])
    else:
        images = np.zeros((0, size, size, 3), np.uint8)
    logger.info("Loaded %d images at %d×%d", len(rows), size, size)
    return ImageSet(ids=manifest.ids, images=images, labels=manifest.binary_labels(), bboxes=scaled)


def inverse_frequency_weights(labels: Sequence[int] | np.ndarray) -> tuple[float, float]:
    """w_c = N / (2 · n_c) so both classes contribute equally to the loss."""
    y = np.asarray(labels, dtype=np.int64)
    counts = np.bincount(y, minlength=2)[:2]
    if np.any(counts == 0):
        raise ValueError(
            f"inverse-frequency weights need both classes, got counts {counts.tolist()}"
        )
    weights = len(y) / (2.0 * counts)
    return (float(weights[0]), float(weights[1]))
