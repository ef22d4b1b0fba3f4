# ==============================================
# DATA PIPELINE
# ==============================================
#
# From files on disk to normalised batches.
#
# Modules:
# --------
# - contracts.py  → Label3, Manifest, Sample, BoundingBox, PreprocessConfig
# - manifest.py   → load_manifest, split, bbox sidecars
# - images.py     → PNG/JPEG decode, PNG encode
# - preprocess.py → resize_bilinear, normalize, compute_channel_means
# - augment.py    → flips and right-angle rotations
# - synthetic.py  → synth_dataset, write_synthetic
# - dataset.py    → ImageSet, load_image_set
#
# ==============================================

from .augment import Symmetry, all_symmetries, augment, draw_symmetry, sample_rng
from .contracts import (
    BoundingBox,
    Label3,
    Manifest,
    ManifestRow,
    PreprocessConfig,
    Sample,
    to_binary_label,
)
from .dataset import ImageSet, inverse_frequency_weights, load_image_set
from .images import ImageDecodeError, decode_image, encode_png, load_image, save_png
from .manifest import (
    ManifestError,
    load_bboxes,
    load_manifest,
    resolve_image_path,
    split,
    write_manifest,
)
from .preprocess import compute_channel_means, normalize, normalize_batch, resize_bilinear
from .synthetic import SyntheticDataset, synth_dataset, write_synthetic

__all__ = [
    "Label3",
    "to_binary_label",
    "BoundingBox",
    "ManifestRow",
    "Manifest",
    "Sample",
    "PreprocessConfig",
    "ManifestError",
    "load_manifest",
    "write_manifest",
    "load_bboxes",
    "resolve_image_path",
    "split",
    "ImageDecodeError",
    "decode_image",
    "encode_png",
    "load_image",
    "save_png",
    "resize_bilinear",
    "normalize",
    "normalize_batch",
    "compute_channel_means",
    "Symmetry",
    "all_symmetries",
    "draw_symmetry",
    "augment",
    "sample_rng",
    "SyntheticDataset",
    "synth_dataset",
    "write_synthetic",
    "ImageSet",
    "load_image_set",
    "inverse_frequency_weights",
]
