"""
Contracts for the training loop.

TrainConfig holds every hyperparameter of a run; History is the per-epoch
record of the four training curves (train/val loss, train/val accuracy) and
round-trips through CSV.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterator, Optional

import pandas as pd

HISTORY_COLUMNS = ["epoch", "train_loss", "val_loss", "train_acc", "val_acc"]


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.05
    epochs: int = 10
    batch_size: int = 16
    seed: int = 0
    class_weights: Optional[tuple[float, float]] = None
    weight_decay: float = 1e-4
    augment: bool = True

    def validate(self) -> "TrainConfig":
        if not (self.learning_rate >= 0 and math.isfinite(self.learning_rate)):
            raise ValueError(f"learning_rate must be finite and ≥ 0, got {self.learning_rate}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be ≥ 0, got {self.epochs}")
        if self.batch_size <= 0:
            raise ValueError(f"batch_size must be positive, got {self.batch_size}")
        if self.weight_decay < 0:
            raise ValueError(f"weight_decay must be ≥ 0, got {self.weight_decay}")
        if self.class_weights is not None:
            if len(self.class_weights) != 2 or any(w < 0 for w in self.class_weights):
                raise ValueError(
                    f"class_weights must be two non-negative values, got {self.class_weights}"
                )
        return self


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    val_loss: float
    train_acc: float
    val_acc: float

    def __post_init__(self) -> None:
        for name in ("train_loss", "val_loss", "train_acc", "val_acc"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"epoch {self.epoch}: {name} is not finite")
        for name in ("train_acc", "val_acc"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValueError(f"epoch {self.epoch}: {name} outside [0, 1]")


@dataclass
class History:
    records: list[EpochRecord] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[EpochRecord]:
        return iter(self.records)

    def __getitem__(self, index: int) -> EpochRecord:
        return self.records[index]

    def append(self, record: EpochRecord) -> None:
        expected = len(self.records) + 1
        if record.epoch != expected:
            raise ValueError(f"expected epoch {expected}, got {record.epoch}")
        self.records.append(record)

    def best_epoch(self) -> Optional[EpochRecord]:
        """Highest validation accuracy; the earliest epoch wins ties."""
        best = None
        for rec in self.records:
            if best is None or rec.val_acc > best.val_acc:
                best = rec
        return best

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(r) for r in self.records], columns=HISTORY_COLUMNS)

    def to_csv(self, path: str | Path) -> None:
        self.to_frame().to_csv(path, index=False, lineterminator="\n", float_format="%.9g")

    @classmethod
    def from_csv(cls, path: str | Path) -> "History":
        frame = pd.read_csv(path)
        missing = [c for c in HISTORY_COLUMNS if c not in frame.columns]
        if missing:
            raise ValueError(f"history CSV {path} lacks columns {missing}")
        history = cls()
        for row in frame.to_dict("records"):
            history.append(
                EpochRecord(
                    epoch=int(row["epoch"]),
                    train_loss=float(row["train_loss"]),
                    val_loss=float(row["val_loss"]),
                    train_acc=float(row["train_acc"]),
                    val_acc=float(row["val_acc"]),
                )
            )
        return history
