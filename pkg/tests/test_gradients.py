"""Autodiff against central finite differences in float64."""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np
import pytest

from src.model import Model, ModelConfig, SkipMode, build_model, forward
from src.nn import (
    BatchNormParams,
    Conv2DParams,
    LinearParams,
    Mode,
    batchnorm2d,
    conv2d,
    linear,
    maxpool2d,
    relu,
    softmax_cross_entropy,
)
from src.tensor import GradTape, Tensor, backward, finite_diff_grad, max_relative_error, mul, reduce

TOLERANCE = 1e-4

Fn = Callable[[Sequence[Tensor]], Tensor]


def _projected(y: Tensor, seed: int = 99) -> Tensor:
    """sum(y ⊙ R) for a fixed random R, a scalar with a dense gradient."""
    r = np.random.default_rng(seed).normal(size=y.shape)
    return reduce("sum", mul(y, Tensor(r, dtype=np.float64)))


def _check(f: Fn, inputs: list[Tensor], wrt: int, eps: float = 1e-3) -> float:
    with GradTape() as tape:
        tape.watch(*inputs)
        loss = f(inputs)
    auto = backward(loss, tape)[inputs[wrt]]

    def g(t: Tensor) -> Tensor:
        args = list(inputs)
        args[wrt] = t
        return f(args)

    return max_relative_error(auto, finite_diff_grad(g, inputs[wrt], eps))


def _f64(rng: np.random.Generator, *shape: int) -> Tensor:
    return Tensor(rng.normal(size=shape), dtype=np.float64)


# ── single layers ─────────────────────────────────────────────────────────────


@pytest.mark.parametrize("wrt", [0, 1, 2])
@pytest.mark.parametrize("stride,padding", [(1, 1), (2, 0)])
def test_conv2d_gradients(rng, wrt, stride, padding):
    inputs = [_f64(rng, 2, 2, 6, 6), _f64(rng, 3, 2, 3, 3), _f64(rng, 3)]

    def f(a):
        return _projected(conv2d(a[0], Conv2DParams(a[1], a[2], stride=stride, padding=padding)))

    assert _check(f, inputs, wrt) < TOLERANCE


@pytest.mark.parametrize("wrt", [0, 1, 2])
@pytest.mark.parametrize("mode", [Mode.TRAIN, Mode.INFER])
def test_batchnorm_gradients(rng, wrt, mode):
    inputs = [_f64(rng, 3, 2, 4, 4), _f64(rng, 2), _f64(rng, 2)]
    running_mean = Tensor(np.array([0.1, -0.2]))
    running_var = Tensor(np.array([0.8, 1.3]))

    def f(a):
        p = BatchNormParams(a[1], a[2], running_mean, running_var)
        return _projected(batchnorm2d(a[0], p, mode))

    assert _check(f, inputs, wrt) < TOLERANCE


def test_maxpool_gradient_away_from_ties(rng):
    # distinct values 0.01 apart so ±eps never reorders a window
    x = Tensor((rng.permutation(2 * 2 * 6 * 6) * 0.01).reshape(2, 2, 6, 6), dtype=np.float64)
    assert _check(lambda a: _projected(maxpool2d(a[0])), [x], 0) < TOLERANCE


def test_relu_gradient_away_from_zero(rng):
    raw = rng.normal(size=(3, 5))
    x = Tensor(np.where(np.abs(raw) < 0.05, 0.5, raw), dtype=np.float64)
    assert _check(lambda a: _projected(relu(a[0])), [x], 0) < TOLERANCE


@pytest.mark.parametrize("wrt", [0, 1, 2])
def test_linear_gradients(rng, wrt):
    inputs = [_f64(rng, 4, 5), _f64(rng, 2, 5), _f64(rng, 2)]
    err = _check(lambda a: _projected(linear(a[0], LinearParams(a[1], a[2]))), inputs, wrt)
    assert err < TOLERANCE


@pytest.mark.parametrize("weights", [None, (0.4, 1.7)])
def test_cross_entropy_gradient(rng, weights):
    logits = _f64(rng, 5, 2)
    labels = [0, 1, 1, 0, 1]
    err = _check(lambda a: softmax_cross_entropy(a[0], labels, weights), [logits], 0)
    assert err < TOLERANCE


# ── whole network ─────────────────────────────────────────────────────────────


def _loss_for(
    model: Model, name: str, batch: Tensor, labels: list[int]
) -> Callable[[Tensor], Tensor]:
    def f(t: Tensor) -> Tensor:
        original = dict(model.named_state())[name]
        model.set_state({name: t})
        try:
            return softmax_cross_entropy(forward(model, batch, Mode.TRAIN), labels)
        finally:
            model.set_state({name: original})

    return f


@pytest.mark.parametrize(
    ("skip_mode", "layer_channels", "eps"),
    [
        (SkipMode.CONSECUTIVE, (2, 3, 4), 1e-3),
        # dense mode needs in_channels ≤ layer_channels[0]
        (SkipMode.DENSE, (3, 3, 4), 1e-7),
    ],
)
def test_full_model_gradients_match_finite_differences(rng, skip_mode, layer_channels, eps):
    config = ModelConfig(input_size=16, layer_channels=layer_channels, skip_mode=skip_mode)
    model = build_model(config, seed=11).astype(np.float64)
    batch = _f64(rng, 2, 3, 16, 16)
    labels = [0, 1]

    named = model.named_parameters()
    with GradTape() as tape:
        tape.watch(*(t for _, t in named))
        loss = softmax_cross_entropy(forward(model, batch, Mode.TRAIN), labels)
    grads = backward(loss, tape)

    for name, tensor in named:
        fd = finite_diff_grad(_loss_for(model, name, batch, labels), tensor, eps=eps)
        err = max_relative_error(grads[tensor], fd)
        assert err < TOLERANCE, f"{name}: relative error {err:.2e}"


def test_float64_shadow_keeps_every_tensor_in_float64(tiny_model):
    shadow = tiny_model.astype(np.float64)
    assert all(t.dtype == np.float64 for _, t in shadow.named_state())
    assert all(t.dtype == np.float32 for _, t in tiny_model.named_state())
