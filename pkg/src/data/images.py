"""PNG/JPEG decoding to H×W×3 uint8 and PNG encoding."""

from __future__ import annotations

import io
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

SUPPORTED_FORMATS = frozenset({"PNG", "JPEG"})


class ImageDecodeError(ValueError):
    """Raised when bytes are not a PNG or JPEG image."""


def decode_image(data: bytes) -> np.ndarray:
    """Decode to 8-bit RGB; alpha is discarded."""
    try:
        with Image.open(io.BytesIO(data)) as img:
            if img.format not in SUPPORTED_FORMATS:
                raise ImageDecodeError(f"unsupported format {img.format}; expected PNG or JPEG")
            rgb = img.convert("RGB")
            return np.asarray(rgb, dtype=np.uint8).copy()
    except (
        UnidentifiedImageError,
        Image.DecompressionBombError,
        OSError,
        SyntaxError,
        ValueError,
    ) as exc:
        if isinstance(exc, ImageDecodeError):
            raise
        raise ImageDecodeError(f"cannot decode image: {exc}") from exc


def load_image(path: str | Path) -> np.ndarray:
    return decode_image(Path(path).read_bytes())


def encode_png(image: np.ndarray) -> bytes:
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError(f"expected H×W×3 image, got shape {image.shape}")
    buf = io.BytesIO()
    Image.fromarray(np.ascontiguousarray(image, dtype=np.uint8)).save(buf, format="PNG")
    return buf.getvalue()


def save_png(image: np.ndarray, path: str | Path) -> None:
    Path(path).write_bytes(encode_png(image))
