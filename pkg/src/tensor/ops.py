"""Differentiable tensor primitives: elementwise arithmetic, matmul, reductions."""

from __future__ import annotations

from typing import Iterable, Optional, Union

import numpy as np

from .tensor import ShapeError, Tensor, apply_op

Operand = Union[Tensor, float, int]

ELEMENTWISE_OPS = ("add", "sub", "mul", "scale")


def _broadcast_form(a: Tensor, b: Operand) -> str:
    """Classify how ``b`` lines up with ``a``: same, scalar or channel."""
    if not isinstance(b, Tensor):
        return "scalar"
    if b.shape == a.shape:
        return "same"
    if b.ndim == 0:
        return "scalar"
    if b.ndim == 1 and a.ndim in (2, 4) and b.shape[0] == a.shape[1]:
        return "channel"
    raise ShapeError(
        f"shapes {a.shape} and {b.shape} are not broadcast-compatible "
        "(need equal shapes, a scalar, or a per-channel vector)",
        a.shape,
        b.shape,
    )


def _expand(b: np.ndarray, form: str, ndim: int) -> np.ndarray:
    if form == "channel":
        return b.reshape((1, -1) + (1,) * (ndim - 2))
    return b


def _collapse(g: np.ndarray, form: str, b_shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to the operand's own shape."""
    if form == "same":
        return g
    if form == "channel":
        axes = tuple(i for i in range(g.ndim) if i != 1)
        return g.sum(axis=axes)
    return np.asarray(g.sum()).reshape(b_shape)


def elementwise(op: str, a: Tensor, b: Operand) -> Tensor:
    """Apply add / sub / mul / scale between ``a`` and ``b``.

    ``b`` may be a tensor of the same shape, a scalar (number or 0-d
    tensor), or a per-channel vector broadcast along axis 1 of a 2-D or 4-D
    ``a``.  ``scale`` requires a plain number.
    """
    if op not in ELEMENTWISE_OPS:
        raise ValueError(f"unknown elementwise op '{op}', expected one of {ELEMENTWISE_OPS}")

    if op == "scale":
        if isinstance(b, Tensor):
            raise ValueError("scale takes a constant, not a tensor")
        c = float(b)
        out = (a.data * a.data.dtype.type(c)).astype(a.dtype, copy=False)
        return apply_op("scale", [a], out, lambda g: (g * g.dtype.type(c),))

    form = _broadcast_form(a, b)
    b_arr = b.data if isinstance(b, Tensor) else np.asarray(b, dtype=a.dtype)
    b_shape = b_arr.shape
    bx = _expand(b_arr, form, a.ndim).astype(a.dtype, copy=False)

    if op == "add":
        out = a.data + bx

        def vjp(g: np.ndarray):
            return g, _collapse(g, form, b_shape)
    elif op == "sub":
        out = a.data - bx

        def vjp(g: np.ndarray):
            return g, -_collapse(g, form, b_shape)
    else:
        a_data = a.data
        out = a_data * bx

        def vjp(g: np.ndarray):
            return g * bx, _collapse(g * a_data, form, b_shape)

    return apply_op(op, [a, b], out.astype(a.dtype, copy=False), vjp)


def add(a: Tensor, b: Operand) -> Tensor:
    return elementwise("add", a, b)


def sub(a: Tensor, b: Operand) -> Tensor:
    return elementwise("sub", a, b)


def mul(a: Tensor, b: Operand) -> Tensor:
    return elementwise("mul", a, b)


def scale(a: Tensor, c: float) -> Tensor:
    return elementwise("scale", a, c)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of a 2-D ``m×k`` and a 2-D ``k×n`` tensor."""
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(
            f"matmul needs 2-D operands, got {a.shape} and {b.shape}", a.shape, b.shape
        )
    if a.shape[1] != b.shape[0]:
        raise ShapeError(
            f"matmul inner dimensions differ: {a.shape} · {b.shape}", a.shape, b.shape
        )
    a_data, b_data = a.data, b.data
    out = a_data @ b_data

    def vjp(g: np.ndarray):
        return g @ b_data.T, a_data.T @ g

    return apply_op("matmul", [a, b], out, vjp)


def _normalize_axes(axes: Optional[Iterable[int]], ndim: int) -> tuple[int, ...]:
    if axes is None:
        return tuple(range(ndim))
    if isinstance(axes, int):
        axes = (axes,)
    norm = []
    for ax in axes:
        if not -ndim <= ax < ndim:
            raise ShapeError(f"axis {ax} out of range for a {ndim}-D tensor")
        norm.append(ax % ndim)
    if len(set(norm)) != len(norm):
        raise ShapeError(f"repeated axis in {tuple(axes)}")
    return tuple(sorted(norm))


def reduce(
    op: str, x: Tensor, axes: Optional[Iterable[int]] = None, keepdims: bool = False
) -> Tensor:
    """Sum or mean over ``axes`` (all axes when ``None``)."""
    if op not in ("sum", "mean"):
        raise ValueError(f"unknown reduction '{op}', expected 'sum' or 'mean'")
    if x.size == 0:
        raise ShapeError(f"cannot reduce an empty tensor of shape {x.shape}", x.shape)
    ax = _normalize_axes(axes, x.ndim)
    count = int(np.prod([x.shape[i] for i in ax])) if ax else 1
    out = x.data.sum(axis=ax, keepdims=keepdims)
    if op == "mean":
        out = out / count
    out = np.asarray(out, dtype=x.dtype)
    in_shape = x.shape
    kept_shape = tuple(1 if i in ax else d for i, d in enumerate(in_shape))

    def vjp(g: np.ndarray):
        gx = np.broadcast_to(np.asarray(g).reshape(kept_shape), in_shape)
        if op == "mean":
            gx = gx / count
        return (np.array(gx, dtype=g.dtype),)

    return apply_op(op, [x], out, vjp)
