# ==============================================
# TENSOR CORE
# ==============================================
#
# Dense float tensors with tape-based reverse-mode
# automatic differentiation.
#
# Modules:
# --------
# - tensor.py     → Tensor, GradTape, apply_op (op recording)
# - ops.py        → elementwise / matmul / reduce primitives
# - autodiff.py   → backward() over a recorded tape
# - gradcheck.py  → central finite differences (64-bit oracle)
#
# ==============================================

from .autodiff import GradientMap, backward
from .gradcheck import finite_diff_grad, max_relative_error
from .ops import add, elementwise, matmul, mul, reduce, scale, sub
from .tensor import GradTape, ShapeError, TapeError, Tensor, apply_op, current_tape

__all__ = [
    "Tensor",
    "GradTape",
    "ShapeError",
    "TapeError",
    "apply_op",
    "current_tape",
    "elementwise",
    "add",
    "sub",
    "mul",
    "scale",
    "matmul",
    "reduce",
    "backward",
    "GradientMap",
    "finite_diff_grad",
    "max_relative_error",
]
