"""Parameter initialisers: fan-in scaled normal weights, zero biases, unit BN scale."""

from __future__ import annotations

import numpy as np

from src.tensor import Tensor

from .contracts import BatchNormParams, Conv2DParams, LinearParams


def kaiming_normal(rng: np.random.Generator, shape: tuple[int, ...], fan_in: int) -> Tensor:
    std = np.sqrt(2.0 / fan_in)
    return Tensor.wrap((rng.standard_normal(shape) * std).astype(np.float32))


def init_conv(
    rng: np.random.Generator,
    in_channels: int,
    out_channels: int,
    kernel_size: int,
    stride: int = 1,
    padding: int = 0,
) -> Conv2DParams:
    fan_in = in_channels * kernel_size * kernel_size
    return Conv2DParams(
        weights=kaiming_normal(rng, (out_channels, in_channels, kernel_size, kernel_size), fan_in),
        bias=Tensor.zeros(out_channels),
        stride=stride,
        padding=padding,
    )


def init_batchnorm(channels: int, eps: float = 1e-5, momentum: float = 0.1) -> BatchNormParams:
    return BatchNormParams(
        gamma=Tensor.ones(channels),
        beta=Tensor.zeros(channels),
        running_mean=Tensor.zeros(channels),
        running_var=Tensor.ones(channels),
        eps=eps,
        momentum=momentum,
    )


def init_linear(rng: np.random.Generator, in_features: int, out_features: int) -> LinearParams:
    return LinearParams(
        weights=kaiming_normal(rng, (out_features, in_features), in_features),
        bias=Tensor.zeros(out_features),
    )
