"""Dense tensor type and the gradient tape that records operations on it.

A ``Tensor`` wraps a read-only numpy buffer (float32 by default, float64 for
the shadow evaluations used by gradient checks).  Operations never mutate
their inputs; every op returns a fresh tensor.

A ``GradTape`` is a context manager.  While it is active on the current
thread, every op whose inputs include a watched tensor (or a tensor produced
by a recorded op) is appended to the tape together with a closure that maps
the output gradient to input gradients.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

MAX_AXES = 4

VJP = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]


class ShapeError(ValueError):
    """Raised when tensor shapes are incompatible with an operation."""

    def __init__(self, message: str, *shapes: tuple[int, ...]):
        self.shapes = shapes
        super().__init__(message)


class TapeError(RuntimeError):
    """Raised when the gradient tape is used incorrectly."""


class Tensor:
    """N-dimensional array (at most 4 axes) with an optional gradient."""

    __slots__ = ("data", "grad", "node_id")

    def __init__(self, data: Any, dtype: Any = None):
        if isinstance(data, Tensor):
            data = data.data
        if dtype is None:
            src = np.asarray(data)
            dtype = np.float64 if src.dtype == np.float64 else np.float32
        arr = np.array(data, dtype=dtype, copy=True)
        self._adopt(arr)

    def _adopt(self, arr: np.ndarray) -> None:
        if arr.ndim > MAX_AXES:
            raise ShapeError(f"tensor has {arr.ndim} axes, at most {MAX_AXES} allowed", arr.shape)
        arr.flags.writeable = False
        self.data = arr
        self.grad: Optional[Tensor] = None
        self.node_id: Optional[int] = None

    @classmethod
    def wrap(cls, arr: np.ndarray) -> "Tensor":
        """Adopt a freshly computed array without copying it."""
        out = cls.__new__(cls)
        # numpy reductions and scalar arithmetic on 0-d arrays yield np.generic
        out._adopt(np.asarray(arr))
        return out

    # -- constructors --------------------------------------------------

    @classmethod
    def zeros(cls, *shape: int, dtype: Any = np.float32) -> "Tensor":
        return cls.wrap(np.zeros(shape, dtype=dtype))

    @classmethod
    def ones(cls, *shape: int, dtype: Any = np.float32) -> "Tensor":
        return cls.wrap(np.ones(shape, dtype=dtype))

    @classmethod
    def zeros_like(cls, other: "Tensor") -> "Tensor":
        return cls.wrap(np.zeros_like(other.data))

    @classmethod
    def ones_like(cls, other: "Tensor") -> "Tensor":
        return cls.wrap(np.ones_like(other.data))

    # -- properties ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(self.data.shape)

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return int(self.data.size)

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.size != 1:
            raise ShapeError(f"item() needs one element, got shape {self.shape}", self.shape)
        return float(self.data.reshape(()))

    def astype(self, dtype: Any) -> "Tensor":
        return Tensor(self.data, dtype=dtype)

    # -- operators -----------------------------------------------------

    def __add__(self, other: Any) -> "Tensor":
        from .ops import elementwise
        return elementwise("add", self, other)

    def __radd__(self, other: Any) -> "Tensor":
        return self.__add__(other)

    def __sub__(self, other: Any) -> "Tensor":
        from .ops import elementwise
        return elementwise("sub", self, other)

    def __mul__(self, other: Any) -> "Tensor":
        from .ops import elementwise
        if isinstance(other, (int, float)):
            return elementwise("scale", self, other)
        return elementwise("mul", self, other)

    def __rmul__(self, other: Any) -> "Tensor":
        return self.__mul__(other)

    def __neg__(self) -> "Tensor":
        from .ops import elementwise
        return elementwise("scale", self, -1.0)

    def __matmul__(self, other: "Tensor") -> "Tensor":
        from .ops import matmul
        return matmul(self, other)

    def sum(self, axes: Optional[Iterable[int]] = None, keepdims: bool = False) -> "Tensor":
        from .ops import reduce
        return reduce("sum", self, axes, keepdims=keepdims)

    def mean(self, axes: Optional[Iterable[int]] = None, keepdims: bool = False) -> "Tensor":
        from .ops import reduce
        return reduce("mean", self, axes, keepdims=keepdims)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, node_id={self.node_id})"


@dataclass
class TapeRecord:
    """One executed operation: input/output node handles plus its VJP closure."""

    op: str
    inputs: tuple[Optional[int], ...]
    output: int
    vjp: VJP


_local = threading.local()


def _stack() -> list["GradTape"]:
    stack = getattr(_local, "tapes", None)
    if stack is None:
        stack = []
        _local.tapes = stack
    return stack


def current_tape() -> Optional["GradTape"]:
    """Return the innermost tape active on this thread, if any."""
    stack = _stack()
    return stack[-1] if stack else None


class GradTape:
    """Ordered record of operations executed while the tape is active.

    Usage::

        with GradTape() as tape:
            tape.watch(w)
            loss = some_loss(w)
        grads = backward(loss, tape)
    """

    def __init__(self) -> None:
        self.records: list[TapeRecord] = []
        self.watched: list[Tensor] = []
        self._nodes: dict[int, int] = {}
        self._keep: list[Tensor] = []  # pins tensors so id() stays unique
        self._next_node = 0
        self.consumed = False

    def __enter__(self) -> "GradTape":
        _stack().append(self)
        return self

    def __exit__(self, *exc: Any) -> None:
        stack = _stack()
        if stack and stack[-1] is self:
            stack.pop()

    def __len__(self) -> int:
        return len(self.records)

    def _new_node(self, tensor: Tensor) -> int:
        node = self._next_node
        self._next_node += 1
        self._nodes[id(tensor)] = node
        self._keep.append(tensor)
        return node

    def watch(self, *tensors: Tensor) -> None:
        """Mark leaf tensors whose gradients backward() should produce."""
        if self.consumed:
            raise TapeError("cannot watch tensors on a consumed tape")
        for t in tensors:
            if id(t) not in self._nodes:
                self._new_node(t)
                self.watched.append(t)

    def node_of(self, tensor: Tensor) -> Optional[int]:
        return self._nodes.get(id(tensor))

    def is_tracked(self, tensor: Any) -> bool:
        return isinstance(tensor, Tensor) and id(tensor) in self._nodes

    def record(self, op: str, inputs: Sequence[Any], output: Tensor, vjp: VJP) -> None:
        if self.consumed:
            raise TapeError("cannot record on a consumed tape")
        handles = tuple(self.node_of(t) if isinstance(t, Tensor) else None for t in inputs)
        node = self._new_node(output)
        output.node_id = node
        self.records.append(TapeRecord(op=op, inputs=handles, output=node, vjp=vjp))

    def release(self) -> None:
        self.records.clear()
        self._keep.clear()
        self.consumed = True


def apply_op(name: str, inputs: Sequence[Any], out: np.ndarray, vjp: VJP) -> Tensor:
    """Wrap an op result and record it on the active tape when any input is tracked."""
    result = Tensor.wrap(out)
    tape = current_tape()
    if tape is not None and any(tape.is_tracked(t) for t in inputs):
        tape.record(name, inputs, result, vjp)
    return result
