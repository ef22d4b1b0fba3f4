# ==============================================
# SERVICE
# ==============================================
#
# HTTP inference over a loaded checkpoint.
#
# Modules:
# --------
# - contracts.py  → PredictionResponse
# - metrics.py    → RequestMetrics (thread-safe request counter)
# - api_server.py → create_app, predict_bytes, serve
#
# ==============================================

from .api_server import create_app, predict_bytes, prepare_image, serve
from .contracts import MELANOMA_THRESHOLD, PredictionResponse
from .metrics import RequestMetrics

__all__ = [
    "PredictionResponse",
    "MELANOMA_THRESHOLD",
    "RequestMetrics",
    "create_app",
    "predict_bytes",
    "prepare_image",
    "serve",
]
