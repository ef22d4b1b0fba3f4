# ==============================================
# PERSISTENCE (trained models across processes)
# ==============================================
#
# Saves a model, its configuration and its preprocessing
# means to a single checksummed file, and restores it.
#
# Modules:
# --------
# - checkpoint.py → save / load / encode / decode, error classes
#
# ==============================================

from .checkpoint import (
    FORMAT_VERSION,
    MAGIC,
    CheckpointError,
    CorruptCheckpointError,
    MalformedCheckpointError,
    NotACheckpointError,
    UnsupportedVersionError,
    checkpoint_version,
    config_nbytes,
    crc_hex,
    decode,
    encode,
    expected_size,
    load,
    load_versioned,
    save,
)

__all__ = [
    "MAGIC",
    "FORMAT_VERSION",
    "CheckpointError",
    "NotACheckpointError",
    "UnsupportedVersionError",
    "CorruptCheckpointError",
    "MalformedCheckpointError",
    "encode",
    "decode",
    "save",
    "load",
    "load_versioned",
    "checkpoint_version",
    "config_nbytes",
    "expected_size",
    "crc_hex",
]
