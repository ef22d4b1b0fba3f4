"""Desk-scale acceptance: overfit, held-out accuracy, Grad-CAM localization.

These share one 200-epoch training run on the synthetic lesion set.
"""

from __future__ import annotations

import numpy as np
import pytest

from src.data import normalize_batch
from src.explain import gradcam
from src.model import forward
from src.persistence import decode, encode
from src.tensor import Tensor
from src.training import evaluate

pytestmark = pytest.mark.slow


def test_overfits_the_training_set(trained_synthetic):
    _, history, _, _ = trained_synthetic
    assert len(history) == 200
    assert history[-1].train_acc >= 0.95
    assert history[-1].train_loss < history[0].train_loss


def test_loss_falls_within_five_epochs(trained_synthetic):
    _, history, _, _ = trained_synthetic
    assert history[4].train_loss < history[0].train_loss


def test_generalises_to_held_out_samples(trained_synthetic):
    model, _, _, val_set = trained_synthetic
    _, accuracy = evaluate(model, val_set)
    assert accuracy >= 0.90


def test_heatmaps_land_on_the_lesion(trained_synthetic):
    model, _, _, val_set = trained_synthetic
    positives = [i for i, y in enumerate(val_set.labels) if y == 1]
    batch = normalize_batch(val_set.images[positives], model.channel_means)
    hits = 0
    for row, i in enumerate(positives):
        heat = gradcam(model, Tensor.wrap(batch.data[row]), target_class=1)
        assert heat.values.min() >= 0.0 and heat.values.max() <= 1.0
        hits += heat.mass_fraction(val_set.bboxes[val_set.ids[i]], dilation=0.1) >= 0.6
    assert hits >= 0.8 * len(positives)


def test_trained_model_round_trips(trained_synthetic):
    model, _, _, val_set = trained_synthetic
    restored = decode(encode(model))
    batch = normalize_batch(val_set.images, model.channel_means)
    np.testing.assert_array_equal(forward(restored, batch).data, forward(model, batch).data)
