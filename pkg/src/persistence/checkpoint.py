# ==============================================
# Model checkpoint: flat little-endian binary file
# ==============================================
#
# Layout (all integers u32 LE, all floats f32 LE):
#
#   magic         8 bytes  "DRMRSNT1"
#   version       u32      1
#   config        u32 × (5 + L)
#                   input_size, in_channels, num_classes,
#                   skip_mode (0 consecutive, 1 dense),
#                   L = number of parameter layers,
#                   layer_channels[0..L)
#   channel_means f32 × 3
#   state         f32 × state_size, in Model.named_state() order
#   crc32         u32      zlib CRC-32 of every preceding byte
#
# Load validates magic → version → CRC → config → length,
# and only then builds a model. The CRC, as 8 hex digits,
# is the model version reported by the service.
#
# ==============================================

from __future__ import annotations

import logging
import os
import struct
import zlib
from pathlib import Path

import numpy as np

from src.model import Model, ModelConfig, ModelConfigError, SkipMode, allocate_model
from src.tensor import Tensor

logger = logging.getLogger(__name__)

MAGIC = b"DRMRSNT1"
FORMAT_VERSION = 1
_U32 = struct.Struct("<I")
_CONFIG_HEAD = struct.Struct("<5I")
_MEANS = struct.Struct("<3f")
_SKIP_CODES = {SkipMode.CONSECUTIVE: 0, SkipMode.DENSE: 1}
_SKIP_MODES = {code: mode for mode, code in _SKIP_CODES.items()}
_STATE_DTYPE = np.dtype("<f4")


class CheckpointError(ValueError):
    """Base class; ``reason`` is the short category that starts the message."""

    reason = "invalid checkpoint"

    def __init__(self, detail: str = ""):
        self.detail = detail
        super().__init__(f"{self.reason}: {detail}" if detail else self.reason)


class NotACheckpointError(CheckpointError):
    reason = "not a checkpoint"


class UnsupportedVersionError(CheckpointError):
    reason = "unsupported version"


class CorruptCheckpointError(CheckpointError):
    reason = "corrupt"


class MalformedCheckpointError(CheckpointError):
    reason = "malformed"


def config_nbytes(config: ModelConfig) -> int:
    return _CONFIG_HEAD.size + _U32.size * len(config.layer_channels)


def expected_size(model: Model) -> int:
    """8 + 4 + config + 12 + 4·state_size + 4."""
    return (
        len(MAGIC) + _U32.size + config_nbytes(model.config) + _MEANS.size
        + _STATE_DTYPE.itemsize * model.state_size() + _U32.size
    )


def crc_hex(data: bytes) -> str:
    return f"{zlib.crc32(data[:-_U32.size]) & 0xFFFFFFFF:08x}"


def encode(model: Model) -> bytes:
    cfg = model.config
    parts = [
        MAGIC,
        _U32.pack(FORMAT_VERSION),
        _CONFIG_HEAD.pack(
            cfg.input_size,
            cfg.in_channels,
            cfg.num_classes,
            _SKIP_CODES[cfg.skip_mode],
            len(cfg.layer_channels),
        ),
        struct.pack(f"<{len(cfg.layer_channels)}I", *cfg.layer_channels),
        _MEANS.pack(*model.channel_means),
    ]
    for name, tensor in model.named_state():
        if not np.all(np.isfinite(tensor.data)):
            raise ValueError(f"cannot checkpoint a model with non-finite values in '{name}'")
        parts.append(np.ascontiguousarray(tensor.data, dtype=_STATE_DTYPE).tobytes())
    body = b"".join(parts)
    return body + _U32.pack(zlib.crc32(body) & 0xFFFFFFFF)


def _read_config(data: bytes) -> tuple[ModelConfig, int]:
    offset = len(MAGIC) + _U32.size
    if len(data) < offset + _CONFIG_HEAD.size + _U32.size:
        raise MalformedCheckpointError("file too short for a config block")
    fields = _CONFIG_HEAD.unpack_from(data, offset)
    input_size, in_channels, num_classes, skip_code, num_layers = fields
    offset += _CONFIG_HEAD.size
    if skip_code not in _SKIP_MODES:
        raise MalformedCheckpointError(f"unknown skip mode code {skip_code}")
    if offset + _U32.size * num_layers + _MEANS.size + _U32.size > len(data):
        raise MalformedCheckpointError(f"config declares {num_layers} layers past the end of file")
    channels = struct.unpack_from(f"<{num_layers}I", data, offset)
    offset += _U32.size * num_layers
    try:
        config = ModelConfig(
            input_size=input_size,
            in_channels=in_channels,
            layer_channels=tuple(channels),
            num_classes=num_classes,
            skip_mode=_SKIP_MODES[skip_code],
        ).validate()
    except ModelConfigError as exc:
        raise MalformedCheckpointError(str(exc)) from None
    return config, offset


def decode(data: bytes) -> Model:
    """Validate and rebuild a model; no weight is read before every check passes."""
    if len(data) < len(MAGIC):
        if data and MAGIC.startswith(data):
            raise CorruptCheckpointError(f"truncated to {len(data)} bytes")
        raise NotACheckpointError("missing magic tag")
    if data[: len(MAGIC)] != MAGIC:
        raise NotACheckpointError(f"magic {data[:len(MAGIC)]!r}")
    if len(data) < len(MAGIC) + _U32.size:
        raise CorruptCheckpointError(f"truncated to {len(data)} bytes")
    (version,) = _U32.unpack_from(data, len(MAGIC))
    if version != FORMAT_VERSION:
        raise UnsupportedVersionError(f"version {version}, expected {FORMAT_VERSION}")
    if len(data) < len(MAGIC) + 2 * _U32.size:
        raise CorruptCheckpointError(f"truncated to {len(data)} bytes")

    body, (stored_crc,) = data[: -_U32.size], _U32.unpack(data[-_U32.size :])
    actual_crc = zlib.crc32(body) & 0xFFFFFFFF
    if actual_crc != stored_crc:
        raise CorruptCheckpointError(
            f"CRC mismatch (stored {stored_crc:08x}, computed {actual_crc:08x})"
        )

    config, offset = _read_config(data)
    means = _MEANS.unpack_from(data, offset)
    offset += _MEANS.size

    state_bytes = len(body) - offset
    expected = _STATE_DTYPE.itemsize * config.state_size()
    if state_bytes != expected:
        raise MalformedCheckpointError(
            f"state holds {state_bytes} bytes, config requires {expected}"
        )

    model = allocate_model(config)

    flat = np.frombuffer(body, dtype=_STATE_DTYPE, offset=offset)
    values = {}
    cursor = 0
    for name, template in model.named_state():
        chunk = flat[cursor : cursor + template.size]
        values[name] = Tensor.wrap(chunk.astype(np.float32).reshape(template.shape))
        cursor += template.size
    model.set_state(values)
    model.channel_means = (float(means[0]), float(means[1]), float(means[2]))
    return model


def save(model: Model, path: str | Path) -> int:
    """Write atomically (temp file, then rename); returns the byte count."""
    path = Path(path)
    data = encode(model)
    tmp = path.with_name(path.name + ".tmp")
    try:
        tmp.write_bytes(data)
        os.replace(tmp, path)
    except OSError:
        tmp.unlink(missing_ok=True)
        raise
    logger.info("Saved checkpoint %s (%d bytes, crc %s)", path, len(data), crc_hex(data))
    return len(data)


def load_versioned(path: str | Path) -> tuple[Model, str]:
    data = Path(path).read_bytes()
    model = decode(data)
    version = crc_hex(data)
    logger.info("Loaded checkpoint %s (%d bytes, crc %s)", path, len(data), version)
    return model, version


def load(path: str | Path) -> Model:
    model, _ = load_versioned(path)
    return model


def checkpoint_version(path: str | Path) -> str:
    """The model version string (trailing CRC as hex) of a valid checkpoint."""
    _, version = load_versioned(path)
    return version
