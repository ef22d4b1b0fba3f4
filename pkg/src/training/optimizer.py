"""Plain SGD with L2 weight decay."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from src.tensor import ShapeError, Tensor


def sgd_step(
    params: Sequence[Tensor],
    grads: Sequence[Optional[Tensor]],
    lr: float,
    weight_decay: float = 0.0,
) -> list[Tensor]:
    """w ← w − lr·(g + weight_decay·w) for each pair; returns new tensors.

    A missing gradient is treated as zero.
    """
    if len(params) != len(grads):
        raise ValueError(f"{len(params)} parameters but {len(grads)} gradients")
    updated = []
    for i, (w, g) in enumerate(zip(params, grads)):
        if g is not None and g.shape != w.shape:
            raise ShapeError(
                f"parameter {i}: shape {w.shape} vs gradient {g.shape}", w.shape, g.shape
            )
        step = np.zeros_like(w.data) if g is None else g.data.astype(w.dtype, copy=False)
        if weight_decay:
            step = step + w.dtype.type(weight_decay) * w.data
        updated.append(Tensor.wrap(w.data - w.dtype.type(lr) * step))
    return updated
