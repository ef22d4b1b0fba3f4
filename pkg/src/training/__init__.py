# ==============================================
# TRAINING
# ==============================================
#
# Modules:
# --------
# - contracts.py → TrainConfig, EpochRecord, History (CSV round trip)
# - optimizer.py → sgd_step
# - trainer.py   → train_epoch, evaluate, fit, TrainingDivergedError
#
# ==============================================

from .contracts import HISTORY_COLUMNS, EpochRecord, History, TrainConfig
from .optimizer import sgd_step
from .trainer import TrainingDivergedError, evaluate, fit, train_epoch

__all__ = [
    "TrainConfig",
    "EpochRecord",
    "History",
    "HISTORY_COLUMNS",
    "sgd_step",
    "train_epoch",
    "evaluate",
    "fit",
    "TrainingDivergedError",
]
