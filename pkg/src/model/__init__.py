# ==============================================
# MODEL
# ==============================================
#
# The residual network: three parameter layers
# plus a binary classifier head.
#
# Modules:
# --------
# - contracts.py → ModelConfig, SkipMode, ModelConfigError
# - resnet.py    → Model, build_model, forward, predict_proba
#
# ==============================================

from .contracts import POSITIVE_CLASS, ModelConfig, ModelConfigError, SkipMode
from .resnet import (
    Model,
    ParameterLayer,
    allocate_model,
    build_model,
    forward,
    forward_with_activations,
    parameter_layer_forward,
    predict_proba,
)

__all__ = [
    "ModelConfig",
    "ModelConfigError",
    "SkipMode",
    "POSITIVE_CLASS",
    "Model",
    "ParameterLayer",
    "build_model",
    "allocate_model",
    "parameter_layer_forward",
    "forward",
    "forward_with_activations",
    "predict_proba",
]
