"""The sub-layers of a parameter layer (conv → batch norm → max pool → ReLU),
the classifier head, and the parameter-free pooling/padding ops used by the
skip paths.

All ops are recorded on the active GradTape through ``apply_op``; buffers are
NCHW numpy arrays.
"""

from __future__ import annotations

import logging

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from src.tensor import ShapeError, Tensor, apply_op, reduce

from .contracts import BatchNormParams, Conv2DParams, LinearParams, Mode

logger = logging.getLogger(__name__)


def _require_nchw(x: Tensor, op: str) -> None:
    if x.ndim != 4:
        raise ShapeError(f"{op} expects an N×C×H×W tensor, got shape {x.shape}", x.shape)


def conv_output_size(size: int, kernel: int, stride: int, padding: int) -> int:
    span = size + 2 * padding - kernel
    if span < 0:
        return 0
    return span // stride + 1


def conv2d(x: Tensor, p: Conv2DParams) -> Tensor:
    """2-D cross-correlation (no kernel flip) with bias, stride and zero padding."""
    _require_nchw(x, "conv2d")
    n, c, h, w = x.shape
    o, ci, kh, kw = p.weights.shape
    if c != ci:
        raise ShapeError(
            f"conv2d channel mismatch: input has {c} channels, weights expect {ci}",
            x.shape,
            p.weights.shape,
        )
    if p.stride < 1 or p.padding < 0:
        raise ValueError(f"conv2d needs stride >= 1 and padding >= 0, got {p.stride}/{p.padding}")
    s, pad = p.stride, p.padding
    h_out = conv_output_size(h, kh, s, pad)
    w_out = conv_output_size(w, kw, s, pad)
    if h_out <= 0 or w_out <= 0:
        raise ShapeError(
            f"conv2d output would be {h_out}×{w_out} for input {h}×{w}, "
            f"kernel {kh}×{kw}, padding {pad}",
            x.shape,
        )

    xp = np.pad(x.data, ((0, 0), (0, 0), (pad, pad), (pad, pad))) if pad else x.data
    win = sliding_window_view(xp, (kh, kw), axis=(2, 3))[:, :, ::s, ::s][:, :, :h_out, :w_out]
    weights = p.weights.data.astype(x.dtype, copy=False)
    bias = p.bias.data.astype(x.dtype, copy=False)
    out = np.tensordot(win, weights, axes=([1, 4, 5], [1, 2, 3])).transpose(0, 3, 1, 2)
    out = np.ascontiguousarray(out + bias.reshape(1, -1, 1, 1), dtype=x.dtype)

    def vjp(g: np.ndarray):
        g_bias = g.sum(axis=(0, 2, 3))
        g_weights = np.tensordot(g, win, axes=([0, 2, 3], [0, 2, 3]))
        g_win = np.tensordot(g, weights, axes=([1], [0]))  # N, Ho, Wo, C, kh, kw
        g_xp = np.zeros(xp.shape, dtype=g.dtype)
        for i in range(kh):
            for j in range(kw):
                g_xp[:, :, i:i + s * (h_out - 1) + 1:s, j:j + s * (w_out - 1) + 1:s] += (
                    g_win[:, :, :, :, i, j].transpose(0, 3, 1, 2)
                )
        g_x = g_xp[:, :, pad:pad + h, pad:pad + w] if pad else g_xp
        return np.ascontiguousarray(g_x), g_weights, g_bias

    return apply_op("conv2d", [x, p.weights, p.bias], out, vjp)


def batchnorm2d(x: Tensor, p: BatchNormParams, mode: Mode | str) -> Tensor:
    """Per-channel batch normalization.

    Train mode normalizes with the batch statistics over (N, H, W) and folds
    them into the running statistics (momentum-weighted moving average, the
    variance entering unbiased).  Infer mode uses the running statistics only.
    """
    _require_nchw(x, "batchnorm2d")
    mode = Mode(mode)
    if x.shape[0] == 0 or x.size == 0:
        raise ValueError(f"batchnorm2d cannot normalize an empty batch of shape {x.shape}")
    if x.shape[1] != p.channels:
        raise ShapeError(
            f"batchnorm2d channel mismatch: input has {x.shape[1]}, params have {p.channels}",
            x.shape,
            p.gamma.shape,
        )
    dt = x.dtype
    gamma = p.gamma.data.astype(dt, copy=False).reshape(1, -1, 1, 1)
    beta = p.beta.data.astype(dt, copy=False).reshape(1, -1, 1, 1)
    axes = (0, 2, 3)

    if mode is Mode.TRAIN:
        count = x.shape[0] * x.shape[2] * x.shape[3]
        mean = x.data.mean(axis=axes, keepdims=True)
        var = x.data.var(axis=axes, keepdims=True)
        inv_std = 1.0 / np.sqrt(var + dt.type(p.eps))
        x_hat = (x.data - mean) * inv_std
        out = (gamma * x_hat + beta).astype(dt, copy=False)

        unbiased = var * (count / (count - 1)) if count > 1 else var
        m = p.momentum
        rm, rv = p.running_mean.data, p.running_var.data
        p.running_mean = Tensor.wrap(((1 - m) * rm + m * mean.reshape(-1)).astype(rm.dtype))
        p.running_var = Tensor.wrap(((1 - m) * rv + m * unbiased.reshape(-1)).astype(rv.dtype))

        def vjp(g: np.ndarray):
            g_gamma = (g * x_hat).sum(axis=axes)
            g_beta = g.sum(axis=axes)
            g_hat = g * gamma
            g_x = (inv_std / count) * (
                count * g_hat
                - g_hat.sum(axis=axes, keepdims=True)
                - x_hat * (g_hat * x_hat).sum(axis=axes, keepdims=True)
            )
            return g_x.astype(dt, copy=False), g_gamma, g_beta
    else:
        mean = p.running_mean.data.astype(dt, copy=False).reshape(1, -1, 1, 1)
        var = p.running_var.data.astype(dt, copy=False).reshape(1, -1, 1, 1)
        inv_std = 1.0 / np.sqrt(var + dt.type(p.eps))
        x_hat = (x.data - mean) * inv_std
        out = (gamma * x_hat + beta).astype(dt, copy=False)

        def vjp(g: np.ndarray):
            dx = (g * gamma * inv_std).astype(dt, copy=False)
            return dx, (g * x_hat).sum(axis=axes), g.sum(axis=axes)

    return apply_op("batchnorm2d", [x, p.gamma, p.beta], out, vjp)


def maxpool2d(x: Tensor, window: int = 2, stride: int = 2) -> Tensor:
    """Non-overlapping max pooling; gradient goes to the first maximum in row-major scan order."""
    _require_nchw(x, "maxpool2d")
    if window != stride:
        raise ValueError(
            f"maxpool2d supports non-overlapping windows only (window={window}, stride={stride})"
        )
    k = window
    n, c, h, w = x.shape
    if h < k or w < k or h % k or w % k:
        raise ShapeError(f"maxpool2d needs spatial dims divisible by {k}, got {h}×{w}", x.shape)
    ho, wo = h // k, w // k
    blocks = x.data.reshape(n, c, ho, k, wo, k).transpose(0, 1, 2, 4, 3, 5)
    windows = blocks.reshape(n, c, ho, wo, k * k)
    idx = windows.argmax(axis=-1)[..., None]
    out = np.take_along_axis(windows, idx, axis=-1)[..., 0]

    def vjp(g: np.ndarray):
        g_win = np.zeros((n, c, ho, wo, k * k), dtype=g.dtype)
        np.put_along_axis(g_win, idx, g[..., None], axis=-1)
        g_x = g_win.reshape(n, c, ho, wo, k, k).transpose(0, 1, 2, 4, 3, 5).reshape(n, c, h, w)
        return (g_x,)

    return apply_op("maxpool2d", [x], np.ascontiguousarray(out), vjp)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out = np.where(mask, x.data, x.dtype.type(0))
    return apply_op("relu", [x], out, lambda g: (g * mask,))


def linear(x: Tensor, p: LinearParams) -> Tensor:
    """x · Wᵀ + bias for an N×in input."""
    if x.ndim != 2:
        raise ShapeError(f"linear expects an N×in tensor, got shape {x.shape}", x.shape)
    if x.shape[1] != p.weights.shape[1]:
        raise ShapeError(
            f"linear feature mismatch: input has {x.shape[1]}, weights expect {p.weights.shape[1]}",
            x.shape,
            p.weights.shape,
        )
    weights = p.weights.data.astype(x.dtype, copy=False)
    x_data = x.data
    out = x_data @ weights.T + p.bias.data.astype(x.dtype, copy=False)

    def vjp(g: np.ndarray):
        return g @ weights, g.T @ x_data, g.sum(axis=0)

    return apply_op("linear", [x, p.weights, p.bias], out, vjp)


def global_avg_pool(x: Tensor) -> Tensor:
    """Mean over the spatial axes: N×C×H×W → N×C."""
    _require_nchw(x, "global_avg_pool")
    return reduce("mean", x, axes=(2, 3))


def avg_pool2d(x: Tensor, k: int) -> Tensor:
    """Non-overlapping k×k average pooling (k == 1 is the identity)."""
    _require_nchw(x, "avg_pool2d")
    if k == 1:
        return x
    n, c, h, w = x.shape
    if h % k or w % k:
        raise ShapeError(f"avg_pool2d needs spatial dims divisible by {k}, got {h}×{w}", x.shape)
    out = x.data.reshape(n, c, h // k, k, w // k, k).mean(axis=(3, 5)).astype(x.dtype, copy=False)

    def vjp(g: np.ndarray):
        spread = np.repeat(np.repeat(g, k, axis=2), k, axis=3) / (k * k)
        return (spread.astype(g.dtype, copy=False),)

    return apply_op("avg_pool2d", [x], out, vjp)


def pad_channels(x: Tensor, channels: int) -> Tensor:
    """Zero-extend the channel axis to ``channels``."""
    _require_nchw(x, "pad_channels")
    c = x.shape[1]
    if channels < c:
        raise ShapeError(f"cannot pad {c} channels down to {channels}", x.shape)
    if channels == c:
        return x
    out = np.pad(x.data, ((0, 0), (0, channels - c), (0, 0), (0, 0)))
    return apply_op("pad_channels", [x], out, lambda g: (np.ascontiguousarray(g[:, :c]),))
