"""Softmax cross-entropy, the training objective."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.tensor import ShapeError, Tensor, apply_op


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax in the max-subtracted form."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=1, keepdims=True)


def softmax_cross_entropy(
    logits: Tensor,
    labels: Sequence[int] | np.ndarray,
    class_weights: Optional[Sequence[float]] = None,
) -> Tensor:
    """Mean over the batch of w[label] · −log softmax(logits)[label]."""
    if logits.ndim != 2:
        raise ShapeError(f"logits must be N×K, got shape {logits.shape}", logits.shape)
    n, k = logits.shape
    y = np.asarray(labels, dtype=np.int64).reshape(-1)
    if y.shape[0] != n:
        raise ShapeError(f"{y.shape[0]} labels for a batch of {n}", logits.shape)
    if n == 0:
        raise ValueError("cross-entropy over an empty batch")
    bad = y[(y < 0) | (y >= k)]
    if bad.size:
        raise ValueError(f"label {int(bad[0])} out of range [0, {k})")

    dt = logits.dtype
    if class_weights is None:
        weights = np.ones(k, dtype=dt)
    else:
        weights = np.asarray(class_weights, dtype=dt)
        if weights.shape != (k,) or np.any(weights < 0):
            raise ValueError(f"class_weights must be {k} non-negative values, got {class_weights}")
    sample_w = weights[y]

    z = logits.data
    shifted = z - z.max(axis=1, keepdims=True)
    log_p = shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    rows = np.arange(n)
    nll = -log_p[rows, y]
    loss = np.asarray((sample_w * nll).sum() / n, dtype=dt)

    def vjp(g: np.ndarray):
        grad = np.exp(log_p)
        grad[rows, y] -= 1
        return ((g * grad * (sample_w / n)[:, None]).astype(dt, copy=False),)

    return apply_op("softmax_cross_entropy", [logits], loss, vjp)
