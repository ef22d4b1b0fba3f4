"""Right-angle rotations and flips (the dihedral group of the square)."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class Symmetry:
    hflip: bool = False
    vflip: bool = False
    quarter_turns: int = 0

    def apply(self, image: np.ndarray) -> np.ndarray:
        out = image
        if self.hflip:
            out = out[:, ::-1]
        if self.vflip:
            out = out[::-1]
        if self.quarter_turns % 4:
            out = np.rot90(out, self.quarter_turns % 4, axes=(0, 1))
        return np.ascontiguousarray(out)


def all_symmetries() -> list[Symmetry]:
    """The eight distinct elements: four rotations with and without a horizontal flip."""
    return [Symmetry(hflip=h, quarter_turns=k) for h in (False, True) for k in range(4)]


def draw_symmetry(rng: np.random.Generator) -> Symmetry:
    hflip = bool(rng.random() < 0.5)
    vflip = bool(rng.random() < 0.5)
    return Symmetry(hflip=hflip, vflip=vflip, quarter_turns=int(rng.integers(0, 4)))


def augment(image: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    """Random hflip (p=.5), vflip (p=.5) and k·90° rotation, k uniform in 0..3."""
    if image.ndim < 2 or image.shape[0] != image.shape[1]:
        raise ValueError(f"augment needs a square image, got shape {image.shape}")
    return draw_symmetry(rng).apply(image)


def sample_rng(seed: int, sample_id: str, epoch: int = 0) -> np.random.Generator:
    """Per-sample stream keyed by (seed, id, epoch); independent of visiting order."""
    id_key = int.from_bytes(hashlib.sha256(sample_id.encode("utf-8")).digest()[:8], "little")
    return np.random.default_rng([seed & _SEED_MASK, id_key, epoch & _SEED_MASK])
