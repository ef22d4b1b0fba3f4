from dataclasses import dataclass
from enum import Enum
from typing import ClassVar

import numpy as np

from src.tensor import Tensor


class Mode(str, Enum):
    """Forward-pass mode; only batch normalization behaves differently."""

    TRAIN = "train"
    INFER = "infer"


@dataclass
class Conv2DParams:
    """Convolution weights (out_ch × in_ch × kh × kw) and per-output-channel bias."""

    weights: Tensor
    bias: Tensor
    stride: int = 1
    padding: int = 0

    trainable: ClassVar[tuple[str, ...]] = ("weights", "bias")
    buffers: ClassVar[tuple[str, ...]] = ()

    @property
    def out_channels(self) -> int:
        return self.weights.shape[0]

    @property
    def in_channels(self) -> int:
        return self.weights.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.weights.shape[2]


@dataclass
class BatchNormParams:
    """Per-channel scale/shift plus the running statistics used at inference."""

    gamma: Tensor
    beta: Tensor
    running_mean: Tensor
    running_var: Tensor
    eps: float = 1e-5
    momentum: float = 0.1

    trainable: ClassVar[tuple[str, ...]] = ("gamma", "beta")
    buffers: ClassVar[tuple[str, ...]] = ("running_mean", "running_var")

    def __post_init__(self) -> None:
        if self.eps <= 0:
            raise ValueError(f"batchnorm eps must be positive, got {self.eps}")
        if not 0.0 < self.momentum < 1.0:
            raise ValueError(f"batchnorm momentum must be in (0, 1), got {self.momentum}")
        if np.any(self.running_var.data < 0):
            raise ValueError("batchnorm running_var must be non-negative")

    @property
    def channels(self) -> int:
        return self.gamma.shape[0]


@dataclass
class LinearParams:
    """Dense layer weights (out × in) and bias (out)."""

    weights: Tensor
    bias: Tensor

    trainable: ClassVar[tuple[str, ...]] = ("weights", "bias")
    buffers: ClassVar[tuple[str, ...]] = ()

    def __post_init__(self) -> None:
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise ValueError(
                f"linear weights {self.weights.shape} and bias {self.bias.shape} are inconsistent"
            )
