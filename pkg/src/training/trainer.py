# ==============================================
# Training loop
# ==============================================
#
# train_epoch → one pass of shuffled mini-batches:
#     augment (per-sample rng) → normalize → forward (train mode)
#     → cross-entropy → backward → sgd_step
# evaluate    → infer-mode loss and accuracy, batched
# fit         → epochs × (train_epoch, evaluate train, evaluate val)
#
# The loop owns the model; parameters are replaced,
# never written in place.
#
# ==============================================

from __future__ import annotations

import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np

from src.data import ImageSet, augment, normalize_batch, sample_rng
from src.model import Model, forward
from src.nn import Mode, softmax_cross_entropy
from src.persistence import save
from src.tensor import GradTape, backward

from .contracts import EpochRecord, History, TrainConfig
from .optimizer import sgd_step

logger = logging.getLogger(__name__)

EVAL_BATCH_SIZE = 64


class TrainingDivergedError(RuntimeError):
    """Loss became NaN or infinite; names where it happened."""

    def __init__(self, epoch: int, batch_index: int, loss: float):
        self.epoch = epoch
        self.batch_index = batch_index
        self.loss = loss
        super().__init__(f"loss diverged to {loss} at epoch {epoch}, batch {batch_index}")


def _batch_images(dataset: ImageSet, idx: np.ndarray, cfg: TrainConfig, epoch: int) -> np.ndarray:
    images = dataset.images[idx]
    if not cfg.augment:
        return images
    return np.stack(
        [augment(img, sample_rng(cfg.seed, dataset.ids[i], epoch)) for img, i in zip(images, idx)]
    )


def train_epoch(
    model: Model,
    train_set: ImageSet,
    cfg: TrainConfig,
    rng: np.random.Generator,
    epoch: int = 1,
) -> tuple[Model, float, float]:
    """One SGD pass. Returns the model, the sample-weighted mean batch loss and
    the running train-mode accuracy."""
    n = len(train_set)
    if n == 0:
        raise ValueError("train_epoch needs a non-empty training set")

    order = rng.permutation(n)
    total_loss = 0.0
    correct = 0
    for batch_index, start in enumerate(range(0, n, cfg.batch_size)):
        idx = order[start : start + cfg.batch_size]
        batch = normalize_batch(_batch_images(train_set, idx, cfg, epoch), model.channel_means)
        labels = train_set.labels[idx]

        named = model.named_parameters()
        with GradTape() as tape:
            tape.watch(*(t for _, t in named))
            logits = forward(model, batch, Mode.TRAIN)
            loss = softmax_cross_entropy(logits, labels, cfg.class_weights)

        value = loss.item()
        if not math.isfinite(value):
            raise TrainingDivergedError(epoch, batch_index, value)
        backward(loss, tape)

        params = [t for _, t in named]
        updated = sgd_step(params, [t.grad for t in params], cfg.learning_rate, cfg.weight_decay)
        model.set_state({name: t for (name, _), t in zip(named, updated)})

        total_loss += value * len(idx)
        correct += int((logits.data.argmax(axis=1) == labels).sum())
        logger.debug("epoch %d batch %d: loss %.6f", epoch, batch_index, value)

    return model, total_loss / n, correct / n


def evaluate(
    model: Model, dataset: ImageSet, batch_size: int = EVAL_BATCH_SIZE
) -> tuple[float, float]:
    """Infer-mode mean cross-entropy (unweighted) and argmax accuracy."""
    n = len(dataset)
    if n == 0:
        raise ValueError("evaluate needs a non-empty dataset")
    total_loss = 0.0
    correct = 0
    for start in range(0, n, batch_size):
        sl = slice(start, start + batch_size)
        batch = normalize_batch(dataset.images[sl], model.channel_means)
        labels = dataset.labels[sl]
        logits = forward(model, batch, Mode.INFER)
        total_loss += softmax_cross_entropy(logits, labels).item() * len(labels)
        correct += int((logits.data.argmax(axis=1) == labels).sum())
    return total_loss / n, correct / n


def fit(
    model: Model,
    train_set: ImageSet,
    val_set: ImageSet,
    cfg: TrainConfig,
    best_checkpoint_path: Optional[str | Path] = None,
) -> tuple[Model, History]:
    """Train for ``cfg.epochs`` epochs, evaluating both sets after each.

    When ``best_checkpoint_path`` is given, the model of the epoch with the
    highest validation accuracy (earliest on ties) is saved there.
    """
    cfg.validate()
    if len(train_set) == 0 or len(val_set) == 0:
        raise ValueError(f"fit needs non-empty sets, got train={len(train_set)} val={len(val_set)}")

    rng = np.random.default_rng(cfg.seed)
    history = History()
    best_acc = -1.0
    for epoch in range(1, cfg.epochs + 1):
        model, _, _ = train_epoch(model, train_set, cfg, rng, epoch)
        train_loss, train_acc = evaluate(model, train_set)
        val_loss, val_acc = evaluate(model, val_set)
        history.append(EpochRecord(epoch, train_loss, val_loss, train_acc, val_acc))
        logger.info(
            "epoch %d/%d  train loss %.4f acc %.3f | val loss %.4f acc %.3f",
            epoch, cfg.epochs, train_loss, train_acc, val_loss, val_acc,
        )
        if best_checkpoint_path is not None and val_acc > best_acc:
            best_acc = val_acc
            save(model, best_checkpoint_path)
    return model, history
