"""Dataset index: CSV manifests, bounding-box sidecars and stratified splits.

Two CSV layouts are accepted:

- ``id,label`` with label one of melanoma / seborrheic_keratosis / nevus
  (case-insensitive);
- the archive ground-truth layout ``image_id,melanoma,seborrheic_keratosis``
  with 0/1 columns (neither flag set means nevus).

Images live next to the manifest as ``<image_dir>/<id>.png`` or ``.jpg``.
"""

from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from .contracts import BoundingBox, Label3, Manifest, ManifestRow

logger = logging.getLogger(__name__)

IMAGE_EXTENSIONS = (".png", ".jpg", ".jpeg")
BBOX_SUFFIX = ".bbox"
MANIFEST_NAME = "manifest.csv"


class ManifestError(ValueError):
    """Raised for an unreadable or inconsistent manifest; ``row`` is the CSV line number."""

    def __init__(self, message: str, row: Optional[int] = None):
        self.row = row
        super().__init__(message if row is None else f"row {row}: {message}")


def resolve_image_path(image_dir: Path, image_id: str) -> Optional[Path]:
    for ext in IMAGE_EXTENSIONS:
        candidate = image_dir / f"{image_id}{ext}"
        if candidate.is_file():
            return candidate
    return None


def _parse_flag(value: str, column: str, row: int) -> bool:
    try:
        return float(value) >= 0.5
    except ValueError:
        raise ManifestError(f"column '{column}' must be 0 or 1, got '{value}'", row) from None


def load_manifest(
    csv_path: str | Path, image_dir: str | Path, check_paths: bool = True
) -> Manifest:
    """Read a manifest CSV and resolve every image path under ``image_dir``."""
    csv_path = Path(csv_path)
    image_dir = Path(image_dir)
    if not csv_path.is_file():
        raise ManifestError(f"manifest not found: {csv_path}")

    try:
        df = pd.read_csv(csv_path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        logger.info("Manifest %s is empty", csv_path)
        return Manifest([])
    df.columns = [str(c).strip().lower() for c in df.columns]
    columns = set(df.columns)

    if {"id", "label"} <= columns:
        archive_layout = False
    elif {"image_id", "melanoma", "seborrheic_keratosis"} <= columns:
        archive_layout = True
    else:
        raise ManifestError(
            f"unrecognised header {list(df.columns)}; expected id,label "
            "or image_id,melanoma,seborrheic_keratosis"
        )

    rows: list[ManifestRow] = []
    first_seen: dict[str, int] = {}
    for offset, record in enumerate(df.to_dict("records")):
        row_no = offset + 2  # header is line 1
        if archive_layout:
            image_id = record["image_id"].strip()
            is_mel = _parse_flag(record["melanoma"], "melanoma", row_no)
            is_sk = _parse_flag(record["seborrheic_keratosis"], "seborrheic_keratosis", row_no)
            if is_mel and is_sk:
                raise ManifestError(
                    f"'{image_id}' is flagged both melanoma and seborrheic keratosis", row_no
                )
            if is_mel:
                label3 = Label3.MELANOMA
            else:
                label3 = Label3.SEBORRHEIC_KERATOSIS if is_sk else Label3.NEVUS
        else:
            image_id = record["id"].strip()
            try:
                label3 = Label3.parse(record["label"])
            except ValueError as exc:
                raise ManifestError(str(exc), row_no) from None

        if not image_id:
            raise ManifestError("empty id", row_no)
        if image_id in first_seen:
            raise ManifestError(
                f"duplicate id '{image_id}' (first seen at row {first_seen[image_id]})", row_no
            )
        first_seen[image_id] = row_no

        path = resolve_image_path(image_dir, image_id)
        if path is None:
            if check_paths:
                raise ManifestError(f"no image for id '{image_id}' in {image_dir}", row_no)
            path = image_dir / f"{image_id}.png"
        rows.append(ManifestRow(id=image_id, path=path, label3=label3))

    manifest = Manifest(rows)
    logger.info(
        "Loaded %d rows from %s (%s)",
        len(manifest),
        csv_path,
        ", ".join(f"{k.value}={v}" for k, v in manifest.counts.items()),
    )
    return manifest


def write_manifest(manifest: Manifest, csv_path: str | Path) -> None:
    frame = pd.DataFrame(
        [{"id": r.id, "label": r.label3.value} for r in manifest], columns=["id", "label"]
    )
    frame.to_csv(csv_path, index=False, lineterminator="\n")


def write_bbox(path: Path, bbox: BoundingBox) -> None:
    path.write_text(bbox.to_line(), encoding="ascii")


def load_bboxes(manifest: Manifest, image_dir: str | Path) -> dict[str, BoundingBox]:
    """Read ``<id>.bbox`` sidecars where they exist."""
    image_dir = Path(image_dir)
    boxes = {}
    for row in manifest:
        sidecar = image_dir / f"{row.id}{BBOX_SUFFIX}"
        if sidecar.is_file():
            boxes[row.id] = BoundingBox.from_line(sidecar.read_text(encoding="ascii"))
    return boxes


def split(manifest: Manifest, train_fraction: float, seed: int) -> tuple[Manifest, Manifest]:
    """Stratified (by binary label) deterministic train/val partition.

    Both sides keep the manifest's row order.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = np.random.default_rng(seed)
    labels = manifest.binary_labels()
    train_idx: list[int] = []
    for cls in (0, 1):
        members = np.flatnonzero(labels == cls)
        n_train = int(np.floor(train_fraction * len(members) + 0.5))
        train_idx.extend(int(i) for i in rng.permutation(members)[:n_train])

    chosen = set(train_idx)
    train = manifest.subset(sorted(chosen))
    val = manifest.subset([i for i in range(len(manifest)) if i not in chosen])
    for name, side in (("train", train), ("val", val)):
        positives = side.positives
        if positives == 0 or positives == len(side):
            raise ValueError(
                f"split leaves the {name} side without both classes "
                f"({positives} positive of {len(side)})"
            )
    logger.info(
        "Split %d rows → train %d / val %d (seed=%d)", len(manifest), len(train), len(val), seed
    )
    return train, val
