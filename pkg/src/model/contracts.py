from dataclasses import dataclass, field
from enum import Enum


class SkipMode(str, Enum):
    """How a parameter layer's skip path is fed.

    CONSECUTIVE: the projection sees only the layer's own input.
    DENSE: the projection sees the layer's input plus every earlier layer
    output and the initial input, pooled and zero-padded to the same shape.
    """

    CONSECUTIVE = "consecutive"
    DENSE = "dense"


class ModelConfigError(ValueError):
    """Raised when a ModelConfig violates the network's shape contract."""


NUM_PARAMETER_LAYERS = 3
KERNEL_SIZE = 3
POSITIVE_CLASS = 1  # melanoma


@dataclass(frozen=True)
class ModelConfig:
    """Shape of the three-parameter-layer residual network."""

    input_size: int = 224
    in_channels: int = 3
    layer_channels: tuple[int, ...] = field(default=(16, 32, 64))
    num_classes: int = 2
    skip_mode: SkipMode = SkipMode.CONSECUTIVE

    def __post_init__(self) -> None:
        object.__setattr__(self, "layer_channels", tuple(int(c) for c in self.layer_channels))
        object.__setattr__(self, "skip_mode", SkipMode(self.skip_mode))

    def validate(self) -> "ModelConfig":
        if len(self.layer_channels) != NUM_PARAMETER_LAYERS:
            raise ModelConfigError(
                f"expected {NUM_PARAMETER_LAYERS} parameter layers, got {len(self.layer_channels)}"
            )
        if any(c <= 0 for c in self.layer_channels):
            raise ModelConfigError(f"channel counts must be positive: {self.layer_channels}")
        if self.in_channels != 3:
            raise ModelConfigError(f"in_channels must be 3 (RGB), got {self.in_channels}")
        divisor = 2 ** NUM_PARAMETER_LAYERS
        if self.input_size <= 0 or self.input_size % divisor:
            raise ModelConfigError(
                f"input_size must be a positive multiple of {divisor}, got {self.input_size}"
            )
        if self.num_classes != 2:
            raise ModelConfigError(f"num_classes must be 2 (binary), got {self.num_classes}")
        if self.skip_mode is SkipMode.DENSE:
            widths = (self.in_channels,) + self.layer_channels[:-1]
            if any(a > b for a, b in zip(widths, widths[1:])):
                raise ModelConfigError(
                    "dense skips need non-decreasing widths "
                    f"in_channels <= layer_channels[0] <= layer_channels[1], got {widths}"
                )
        return self

    @property
    def feature_sizes(self) -> tuple[int, ...]:
        """Spatial size after each parameter layer."""
        return tuple(self.input_size // 2 ** (i + 1) for i in range(NUM_PARAMETER_LAYERS))

    def layer_in_channels(self, index: int) -> int:
        return self.in_channels if index == 0 else self.layer_channels[index - 1]

    def state_size(self) -> int:
        """Values in the full state (parameters plus running statistics)."""
        total = 0
        for i, out_ch in enumerate(self.layer_channels):
            in_ch = self.layer_in_channels(i)
            conv = out_ch * in_ch * KERNEL_SIZE * KERNEL_SIZE + out_ch
            skip = out_ch * in_ch + out_ch
            total += conv + 4 * out_ch + skip
        return total + self.num_classes * self.layer_channels[-1] + self.num_classes
