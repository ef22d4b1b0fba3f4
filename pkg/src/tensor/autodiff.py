"""Reverse-mode accumulation over a recorded GradTape."""

from __future__ import annotations

import logging
from typing import Iterator, Optional, Sequence

import numpy as np

from .tensor import GradTape, TapeError, Tensor

logger = logging.getLogger(__name__)


class GradientMap:
    """Gradients keyed by tensor identity.

    ``grads[w]`` returns the gradient tensor for ``w`` (a watched leaf or a
    requested source).
    """

    def __init__(self) -> None:
        self._entries: dict[int, tuple[Tensor, Tensor]] = {}

    def _put(self, tensor: Tensor, grad: Tensor) -> None:
        self._entries[id(tensor)] = (tensor, grad)

    def __getitem__(self, tensor: Tensor) -> Tensor:
        try:
            return self._entries[id(tensor)][1]
        except KeyError:
            raise KeyError(f"no gradient recorded for {tensor!r}") from None

    def get(self, tensor: Tensor, default: Optional[Tensor] = None) -> Optional[Tensor]:
        entry = self._entries.get(id(tensor))
        return entry[1] if entry is not None else default

    def __contains__(self, tensor: object) -> bool:
        return id(tensor) in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[Tensor]:
        return (t for t, _ in self._entries.values())


def _as_grad(g: Optional[np.ndarray], like: Tensor) -> Tensor:
    if g is None:
        return Tensor.wrap(np.zeros_like(like.data))
    return Tensor.wrap(np.asarray(g, dtype=like.dtype).reshape(like.shape))


def backward(
    loss: Tensor,
    tape: GradTape,
    sources: Optional[Sequence[Tensor]] = None,
) -> GradientMap:
    """Propagate d(loss)/d(·) back through ``tape``.

    Every watched leaf gets ``.grad`` populated (zeros when the loss does not
    depend on it).  ``sources`` may name intermediate tensors whose gradients
    should also be returned.  The tape is consumed.
    """
    if tape.consumed:
        raise TapeError("tape already consumed by a previous backward pass")
    if loss.size != 1:
        raise TapeError(f"loss must be scalar, got shape {loss.shape}")
    loss_node = tape.node_of(loss)
    if loss_node is None:
        raise TapeError("loss was not computed under this tape")

    grads: dict[int, np.ndarray] = {loss_node: np.ones(loss.shape, dtype=loss.dtype)}

    for rec in reversed(tape.records):
        g_out = grads.get(rec.output)
        if g_out is None:
            continue
        in_grads = rec.vjp(g_out)
        for node, g_in in zip(rec.inputs, in_grads):
            if node is None or g_in is None:
                continue
            prev = grads.get(node)
            # shared inputs (skip paths) receive the sum of all contributions
            grads[node] = g_in if prev is None else prev + g_in

    result = GradientMap()
    for leaf in tape.watched:
        node = tape.node_of(leaf)
        g = grads.get(node) if node is not None else None
        leaf.grad = _as_grad(g, leaf)
        result._put(leaf, leaf.grad)

    for src in sources or ():
        node = tape.node_of(src)
        if node is None:
            raise TapeError(f"requested source {src!r} is not on this tape")
        g = grads.get(node)
        result._put(src, _as_grad(g, src))

    logger.debug("backward: %d records, %d gradients", len(tape.records), len(result))
    tape.release()
    return result
