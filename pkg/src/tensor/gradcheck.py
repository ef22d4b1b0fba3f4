"""Central finite differences, evaluated in 64-bit, as a gradient oracle."""

from __future__ import annotations

from typing import Callable, Union

import numpy as np

from .tensor import ShapeError, Tensor

ScalarFn = Callable[[Tensor], Union[Tensor, float]]


def _scalar(value: Union[Tensor, float]) -> float:
    if isinstance(value, Tensor):
        if value.size != 1:
            raise ShapeError(f"function must return a scalar, got shape {value.shape}", value.shape)
        return float(value.data.reshape(()))
    arr = np.asarray(value, dtype=np.float64)
    if arr.size != 1:
        raise ShapeError(f"function must be scalar-valued, got shape {arr.shape}", arr.shape)
    return float(arr.reshape(()))


def finite_diff_grad(f: ScalarFn, x: Tensor, eps: float = 1e-3) -> Tensor:
    """Estimate df/dx by (f(x + eps·e_i) - f(x - eps·e_i)) / (2·eps) per element.

    ``f`` receives float64 tensors; the result is a float64 tensor shaped like ``x``.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    base = np.array(x.data, dtype=np.float64)
    grad = np.zeros_like(base)
    flat = base.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        f_plus = _scalar(f(Tensor(base, dtype=np.float64)))
        flat[i] = orig - eps
        f_minus = _scalar(f(Tensor(base, dtype=np.float64)))
        flat[i] = orig
        grad.reshape(-1)[i] = (f_plus - f_minus) / (2.0 * eps)
    return Tensor.wrap(grad)


def max_relative_error(
    a: np.ndarray | Tensor, b: np.ndarray | Tensor, floor: float = 1e-3
) -> float:
    """max|a - b| scaled by the larger of the two magnitudes (never below ``floor``)."""
    a_arr = np.asarray(a.data if isinstance(a, Tensor) else a, dtype=np.float64)
    b_arr = np.asarray(b.data if isinstance(b, Tensor) else b, dtype=np.float64)
    if a_arr.shape != b_arr.shape:
        raise ShapeError(
            f"cannot compare shapes {a_arr.shape} and {b_arr.shape}", a_arr.shape, b_arr.shape
        )
    if a_arr.size == 0:
        return 0.0
    scale = max(float(np.abs(a_arr).max()), float(np.abs(b_arr).max()), floor)
    return float(np.abs(a_arr - b_arr).max()) / scale
