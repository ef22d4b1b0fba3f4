# ==============================================
# Residual network with three parameter layers
# ==============================================
#
# Each parameter layer:
#
#   main = MaxPool2x2( BN( Conv3x3(x) ) )
#   skip = Conv1x1/stride2( x )            (projection shortcut)
#   out  = ReLU( main + skip )
#
# Spatial size halves at every layer: S → S/2 → S/4 → S/8.
# The head is global average pooling followed by a
# linear map to two logits (index 1 = melanoma).
#
# In dense skip mode, layer i's projection is fed
#
#   x_i + Σ_j pad_channels( avg_pool( h_j ), C_in(i) )
#
# over the initial input and every earlier layer output h_j,
# which is the "every layer sees all previous outputs" reading
# of an unraveled residual chain.
#
# State order (shared with the checkpoint format):
#   layer{i}.conv.weights, layer{i}.conv.bias,
#   layer{i}.bn.gamma, layer{i}.bn.beta,
#   layer{i}.bn.running_mean, layer{i}.bn.running_var,
#   layer{i}.skip.weights, layer{i}.skip.bias   for i = 0, 1, 2
#   head.weights, head.bias
#
# ==============================================

from __future__ import annotations

import copy
import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Iterator, Mapping, Optional

import numpy as np

from src.nn import (
    BatchNormParams,
    Conv2DParams,
    LinearParams,
    Mode,
    avg_pool2d,
    batchnorm2d,
    conv2d,
    global_avg_pool,
    init_batchnorm,
    init_conv,
    init_linear,
    linear,
    maxpool2d,
    pad_channels,
    relu,
    softmax,
)
from src.tensor import ShapeError, Tensor

from .contracts import KERNEL_SIZE, NUM_PARAMETER_LAYERS, ModelConfig, SkipMode

logger = logging.getLogger(__name__)

Params = Conv2DParams | BatchNormParams | LinearParams


@dataclass
class ParameterLayer:
    conv: Conv2DParams
    bn: BatchNormParams
    skip: Conv2DParams

    def components(self) -> tuple[tuple[str, Params], ...]:
        return (("conv", self.conv), ("bn", self.bn), ("skip", self.skip))


@dataclass
class Model:
    """Three parameter layers, a linear head and the preprocessing means."""

    config: ModelConfig
    layers: list[ParameterLayer]
    head: LinearParams
    channel_means: tuple[float, float, float] = field(default=(0.0, 0.0, 0.0))

    def _components(self) -> Iterator[tuple[str, Params]]:
        for i, layer in enumerate(self.layers):
            for name, comp in layer.components():
                yield f"layer{i}.{name}", comp
        yield "head", self.head

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        """Trainable tensors in checkpoint order."""
        return [
            (f"{prefix}.{attr}", getattr(comp, attr))
            for prefix, comp in self._components()
            for attr in comp.trainable
        ]

    def named_state(self) -> list[tuple[str, Tensor]]:
        """Trainable tensors plus batch-norm running statistics, in checkpoint order."""
        return [
            (f"{prefix}.{attr}", getattr(comp, attr))
            for prefix, comp in self._components()
            for attr in comp.trainable + comp.buffers
        ]

    def set_state(self, values: Mapping[str, Tensor]) -> None:
        """Replace named tensors; shapes must match the current ones."""
        owners = {prefix: comp for prefix, comp in self._components()}
        for name, tensor in values.items():
            prefix, _, attr = name.rpartition(".")
            comp = owners.get(prefix)
            if comp is None or attr not in comp.trainable + comp.buffers:
                raise KeyError(f"unknown model tensor '{name}'")
            current = getattr(comp, attr)
            if current.shape != tensor.shape:
                raise ShapeError(
                    f"'{name}' expects shape {current.shape}, got {tensor.shape}",
                    current.shape,
                    tensor.shape,
                )
            setattr(comp, attr, tensor)

    def parameter_count(self) -> int:
        return sum(t.size for _, t in self.named_parameters())

    def state_size(self) -> int:
        return sum(t.size for _, t in self.named_state())

    def checksum(self) -> str:
        """SHA-256 over every state tensor and the channel means."""
        digest = hashlib.sha256()
        for name, tensor in self.named_state():
            digest.update(name.encode("ascii"))
            digest.update(np.ascontiguousarray(tensor.data).tobytes())
        digest.update(np.asarray(self.channel_means, dtype=np.float32).tobytes())
        return digest.hexdigest()

    def astype(self, dtype: Any) -> "Model":
        """Deep copy with every state tensor cast to ``dtype``."""
        clone = copy.deepcopy(self)
        clone.set_state({name: t.astype(dtype) for name, t in clone.named_state()})
        return clone


def build_model(config: ModelConfig, seed: int) -> Model:
    """Initialise a model deterministically from ``seed``."""
    config.validate()
    rng = np.random.default_rng(seed)
    layers = []
    for i, out_ch in enumerate(config.layer_channels):
        in_ch = config.layer_in_channels(i)
        layers.append(
            ParameterLayer(
                conv=init_conv(rng, in_ch, out_ch, KERNEL_SIZE, stride=1, padding=KERNEL_SIZE // 2),
                bn=init_batchnorm(out_ch),
                skip=init_conv(rng, in_ch, out_ch, 1, stride=2, padding=0),
            )
        )
    head = init_linear(rng, config.layer_channels[-1], config.num_classes)
    model = Model(config=config, layers=layers, head=head)
    logger.debug(
        "built model %s with %d parameters (seed=%d)", config, model.parameter_count(), seed
    )
    return model


def allocate_model(config: ModelConfig) -> Model:
    """Model with the right shapes and zero-filled tensors (filled in by a loader)."""
    config.validate()

    def zero_conv(in_ch: int, out_ch: int, kernel: int, stride: int, padding: int) -> Conv2DParams:
        weights = Tensor.zeros(out_ch, in_ch, kernel, kernel)
        return Conv2DParams(weights, Tensor.zeros(out_ch), stride=stride, padding=padding)

    def zero_bn(channels: int) -> BatchNormParams:
        return BatchNormParams(*(Tensor.zeros(channels) for _ in range(4)))

    layers = []
    for i, out_ch in enumerate(config.layer_channels):
        in_ch = config.layer_in_channels(i)
        layers.append(
            ParameterLayer(
                conv=zero_conv(in_ch, out_ch, KERNEL_SIZE, 1, KERNEL_SIZE // 2),
                bn=zero_bn(out_ch),
                skip=zero_conv(in_ch, out_ch, 1, 2, 0),
            )
        )
    head = LinearParams(
        Tensor.zeros(config.num_classes, config.layer_channels[-1]),
        Tensor.zeros(config.num_classes),
    )
    return Model(config=config, layers=layers, head=head)


def parameter_layer_forward(
    x: Tensor,
    layer_index: int,
    model: Model,
    mode: Mode | str,
    skip_input: Optional[Tensor] = None,
) -> Tensor:
    """ReLU(MaxPool(BN(Conv(x))) + projection(skip_input or x))."""
    if not 0 <= layer_index < len(model.layers):
        raise IndexError(f"layer_index {layer_index} out of range")
    expected_ch = model.config.layer_in_channels(layer_index)
    if x.ndim != 4 or x.shape[1] != expected_ch:
        raise ShapeError(
            f"layer {layer_index} expects N×{expected_ch}×H×W input, got {x.shape}", x.shape
        )
    if x.shape[2] % 2 or x.shape[3] % 2:
        raise ShapeError(f"layer {layer_index} needs even spatial dims, got {x.shape[2:]}", x.shape)
    layer = model.layers[layer_index]
    main = maxpool2d(batchnorm2d(conv2d(x, layer.conv), layer.bn, mode))
    skip = conv2d(x if skip_input is None else skip_input, layer.skip)
    return relu(main + skip)


def dense_skip_input(history: list[Tensor], channels: int) -> Tensor:
    """Sum the direct input with every earlier tensor brought to its shape."""
    direct = history[-1]
    size = direct.shape[2]
    aggregate = direct
    for earlier in history[:-1]:
        pooled = avg_pool2d(earlier, earlier.shape[2] // size)
        aggregate = aggregate + pad_channels(pooled, channels)
    return aggregate


def _check_batch(model: Model, batch: Tensor) -> None:
    cfg = model.config
    s = cfg.input_size
    if batch.ndim != 4 or batch.shape[1] != cfg.in_channels or batch.shape[2:] != (s, s):
        raise ShapeError(
            f"expected batch N×{cfg.in_channels}×{s}×{s}, got {batch.shape}", batch.shape
        )


def forward_with_activations(
    model: Model, batch: Tensor, mode: Mode | str
) -> tuple[Tensor, list[Tensor]]:
    """Logits plus each parameter layer's post-ReLU output."""
    _check_batch(model, batch)
    dense = model.config.skip_mode is SkipMode.DENSE
    history = [batch]
    outputs: list[Tensor] = []
    x = batch
    for i in range(NUM_PARAMETER_LAYERS):
        skip_in = None
        if dense and i > 0:
            skip_in = dense_skip_input(history, model.config.layer_in_channels(i))
        x = parameter_layer_forward(x, i, model, mode, skip_in)
        history.append(x)
        outputs.append(x)
    logits = linear(global_avg_pool(x), model.head)
    return logits, outputs


def forward(model: Model, batch: Tensor, mode: Mode | str = Mode.INFER) -> Tensor:
    """N×3×S×S preprocessed batch → N×2 logits."""
    logits, _ = forward_with_activations(model, batch, mode)
    return logits


def predict_proba(model: Model, batch: Tensor) -> Tensor:
    """Softmax of infer-mode logits; column 1 is the melanoma probability."""
    logits = forward(model, batch, Mode.INFER)
    return Tensor.wrap(softmax(logits.data).astype(logits.dtype, copy=False))
