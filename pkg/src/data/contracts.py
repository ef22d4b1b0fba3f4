# ==============================================
# Data contracts
# ==============================================
#
# ENUMS:
# ------
# - Label3: melanoma / seborrheic_keratosis / nevus
#     The three diagnosis classes of the dermoscopy archive.
#     to_binary_label() folds them into melanoma (1) vs rest (0).
#
# CLASSES:
# --------
# - BoundingBox   → lesion box x0 y0 x1 y1 (x1, y1 exclusive)
# - ManifestRow   → one labeled image: id, path, label3
# - Manifest      → ordered rows plus per-class counts
# - Sample        → decoded image with its label (and box, if synthetic)
# - PreprocessConfig → target size and per-channel means
#
# ==============================================

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Iterator, Optional

import numpy as np


class Label3(str, Enum):
    MELANOMA = "melanoma"
    SEBORRHEIC_KERATOSIS = "seborrheic_keratosis"
    NEVUS = "nevus"

    @classmethod
    def parse(cls, raw: str) -> "Label3":
        """Case-insensitive; spaces and hyphens are read as underscores."""
        key = raw.strip().lower().replace("-", "_").replace(" ", "_")
        try:
            return cls(key)
        except ValueError:
            raise ValueError(f"unknown label '{raw}'") from None


def to_binary_label(label3: Label3) -> int:
    """melanoma → 1, nevus / seborrheic keratosis → 0."""
    return 1 if Label3(label3) is Label3.MELANOMA else 0


@dataclass(frozen=True)
class BoundingBox:
    x0: int
    y0: int
    x1: int
    y1: int

    def dilate(self, margin: float, size: int) -> "BoundingBox":
        """Grow by ``margin`` pixels on every side, clipped to a size×size image."""
        m = int(round(margin))
        return BoundingBox(
            max(0, self.x0 - m), max(0, self.y0 - m), min(size, self.x1 + m), min(size, self.y1 + m)
        )

    def scale(self, factor: float) -> "BoundingBox":
        return BoundingBox(
            int(np.floor(self.x0 * factor)),
            int(np.floor(self.y0 * factor)),
            int(np.ceil(self.x1 * factor)),
            int(np.ceil(self.y1 * factor)),
        )

    def to_line(self) -> str:
        return f"{self.x0} {self.y0} {self.x1} {self.y1}\n"

    @classmethod
    def from_line(cls, line: str) -> "BoundingBox":
        parts = line.split()
        if len(parts) != 4:
            raise ValueError(f"bounding box needs four integers, got '{line.strip()}'")
        x0, y0, x1, y1 = (int(p) for p in parts)
        return cls(x0, y0, x1, y1)


@dataclass(frozen=True)
class ManifestRow:
    id: str
    path: Path
    label3: Label3

    @property
    def label(self) -> int:
        return to_binary_label(self.label3)


@dataclass
class Manifest:
    rows: list[ManifestRow] = field(default_factory=list)

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for row in self.rows:
            if row.id in seen:
                raise ValueError(f"duplicate id '{row.id}' in manifest")
            seen.add(row.id)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self) -> Iterator[ManifestRow]:
        return iter(self.rows)

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.rows]

    @property
    def counts(self) -> dict[Label3, int]:
        counts = {label: 0 for label in Label3}
        for row in self.rows:
            counts[row.label3] += 1
        return counts

    @property
    def positives(self) -> int:
        return sum(r.label for r in self.rows)

    def binary_labels(self) -> np.ndarray:
        return np.array([r.label for r in self.rows], dtype=np.int64)

    def subset(self, indices: list[int]) -> "Manifest":
        return Manifest([self.rows[i] for i in indices])


@dataclass
class Sample:
    id: str
    image: np.ndarray  # H×W×3 uint8
    label3: Label3
    bbox: Optional[BoundingBox] = None

    def __post_init__(self) -> None:
        if self.image.ndim != 3 or self.image.shape[2] != 3 or self.image.dtype != np.uint8:
            raise ValueError(
                f"sample image must be H×W×3 uint8, got {self.image.shape} {self.image.dtype}"
            )
        if min(self.image.shape[:2]) < 8:
            raise ValueError(f"sample image must be at least 8×8, got {self.image.shape[:2]}")

    @property
    def label(self) -> int:
        return to_binary_label(self.label3)


@dataclass(frozen=True)
class PreprocessConfig:
    target_size: int = 224
    channel_means: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def validate(self) -> "PreprocessConfig":
        if self.target_size <= 0 or self.target_size % 8:
            raise ValueError(f"target_size must be a multiple of 8, not {self.target_size}")
        if len(self.channel_means) != 3 or not all(0.0 <= m <= 1.0 for m in self.channel_means):
            raise ValueError(f"channel_means must be three values in [0, 1]: {self.channel_means}")
        return self
