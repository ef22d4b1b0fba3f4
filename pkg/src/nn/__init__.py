# ==============================================
# NN LAYERS
# ==============================================
#
# The four sub-layers of a parameter layer
# (conv → batch norm → max pool → ReLU), the
# classifier head and the cross-entropy loss.
#
# Modules:
# --------
# - contracts.py → Conv2DParams, BatchNormParams, LinearParams, Mode
# - init.py      → fan-in scaled initialisers
# - layers.py    → conv2d, batchnorm2d, maxpool2d, relu, linear,
#                  global_avg_pool, avg_pool2d, pad_channels
# - losses.py    → softmax, softmax_cross_entropy
#
# ==============================================

from .contracts import BatchNormParams, Conv2DParams, LinearParams, Mode
from .init import init_batchnorm, init_conv, init_linear, kaiming_normal
from .layers import (
    avg_pool2d,
    batchnorm2d,
    conv2d,
    global_avg_pool,
    linear,
    maxpool2d,
    pad_channels,
    relu,
)
from .losses import softmax, softmax_cross_entropy

__all__ = [
    "Mode",
    "Conv2DParams",
    "BatchNormParams",
    "LinearParams",
    "kaiming_normal",
    "init_conv",
    "init_batchnorm",
    "init_linear",
    "conv2d",
    "batchnorm2d",
    "maxpool2d",
    "relu",
    "linear",
    "global_avg_pool",
    "avg_pool2d",
    "pad_channels",
    "softmax",
    "softmax_cross_entropy",
]
