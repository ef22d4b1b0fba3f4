"""Shared fixtures: tiny models, synthetic datasets on disk, PNG bytes."""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.data import (  # noqa: E402
    ImageSet,
    compute_channel_means,
    encode_png,
    synth_dataset,
    write_synthetic,
)
from src.model import Model, ModelConfig, build_model  # noqa: E402
from src.training import TrainConfig, fit  # noqa: E402


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> ModelConfig:
    return ModelConfig(input_size=16, layer_channels=(2, 3, 4))


@pytest.fixture
def tiny_model(tiny_config: ModelConfig) -> Model:
    model = build_model(tiny_config, seed=3)
    model.channel_means = (0.5, 0.4, 0.3)
    return model


@pytest.fixture(scope="session")
def synth_dir(tmp_path_factory: pytest.TempPathFactory) -> Path:
    """16 synthetic 16×16 samples written with manifest and bbox sidecars."""
    out = tmp_path_factory.mktemp("synth")
    write_synthetic(synth_dataset(16, 16, seed=5), out)
    return out


@pytest.fixture(scope="session")
def trained_synthetic():
    """The desk-scale run: 64 training and 32 held-out samples at 32×32."""
    train_set = ImageSet.from_samples(synth_dataset(64, 32, seed=7).samples)
    val_set = ImageSet.from_samples(synth_dataset(32, 32, seed=8).samples)
    model = build_model(ModelConfig(input_size=32), seed=7)
    model.channel_means = compute_channel_means(train_set.images)
    cfg = TrainConfig(learning_rate=0.05, epochs=200, batch_size=16, seed=7, augment=False)
    model, history = fit(model, train_set, val_set, cfg)
    return model, history, train_set, val_set


@pytest.fixture
def make_image(rng: np.random.Generator):
    """Factory for random size×size RGB uint8 images."""

    def _make(size: int) -> np.ndarray:
        return rng.integers(0, 256, size=(size, size, 3), dtype=np.uint8)

    return _make


@pytest.fixture
def make_png(make_image):
    """Factory for PNG-encoded random images."""

    def _make(size: int) -> bytes:
        return encode_png(make_image(size))

    return _make
