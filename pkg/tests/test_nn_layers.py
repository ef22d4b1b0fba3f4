"""Forward behaviour of the parameter-layer sub-layers, the head and the loss."""

from __future__ import annotations

import math

import numpy as np
import pytest

from src.nn import (
    BatchNormParams,
    Conv2DParams,
    LinearParams,
    Mode,
    avg_pool2d,
    batchnorm2d,
    conv2d,
    init_batchnorm,
    linear,
    maxpool2d,
    pad_channels,
    relu,
    softmax_cross_entropy,
)
from src.tensor import ShapeError, Tensor


def _conv(weights, bias=None, stride=1, padding=0) -> Conv2DParams:
    w = np.asarray(weights, dtype=np.float64)
    b = np.zeros(w.shape[0]) if bias is None else np.asarray(bias, dtype=np.float64)
    return Conv2DParams(Tensor(w), Tensor(b), stride=stride, padding=padding)


def _bn(channels: int, gamma=1.0, beta=0.0, mean=0.0, var=1.0) -> BatchNormParams:
    return BatchNormParams(
        gamma=Tensor(np.full(channels, gamma)),
        beta=Tensor(np.full(channels, beta)),
        running_mean=Tensor(np.full(channels, mean)),
        running_var=Tensor(np.full(channels, var)),
    )


def _naive_conv(x, w, b, stride, pad):
    n, c, h, wd = x.shape
    o, _, kh, kw = w.shape
    xp = np.pad(x, ((0, 0), (0, 0), (pad, pad), (pad, pad)))
    ho = (h + 2 * pad - kh) // stride + 1
    wo = (wd + 2 * pad - kw) // stride + 1
    out = np.zeros((n, o, ho, wo))
    for i in range(n):
        for oc in range(o):
            for r in range(ho):
                for col in range(wo):
                    acc = b[oc]
                    for ic in range(c):
                        for u in range(kh):
                            for v in range(kw):
                                acc += xp[i, ic, r * stride + u, col * stride + v] * w[oc, ic, u, v]
                    out[i, oc, r, col] = acc
    return out


# ── conv2d ────────────────────────────────────────────────────────────────────


def test_conv_one_by_one_kernel_scales():
    out = conv2d(Tensor(np.ones((1, 1, 3, 3))), _conv([[[[2.0]]]]))
    np.testing.assert_array_equal(out.data, np.full((1, 1, 3, 3), 2.0))


def test_conv_forced_dot_product():
    out = conv2d(Tensor([[[[1.0, 2.0], [3.0, 4.0]]]]), _conv([[[[1.0, 0.0], [0.0, 1.0]]]]))
    np.testing.assert_array_equal(out.data, [[[[5.0]]]])


def test_conv_padded_random_matches_direct_loops(rng):
    x = rng.normal(size=(2, 3, 8, 8))
    w = rng.normal(size=(4, 3, 3, 3))
    b = rng.normal(size=4)
    out = conv2d(Tensor(x, dtype=np.float32), _conv(w, b, padding=1))
    assert out.shape == (2, 4, 8, 8)
    np.testing.assert_allclose(out.data, _naive_conv(x, w, b, 1, 1), atol=1e-5)


@pytest.mark.parametrize("case", range(20))
def test_conv_matches_direct_loops_random_shapes(case):
    rng = np.random.default_rng(case)
    n, c, o = (int(v) for v in rng.integers(1, 4, size=3))
    k = int(rng.choice([1, 3]))
    stride = int(rng.integers(1, 3))
    pad = int(rng.integers(0, 2))
    size = int(rng.integers(k + 1, 9))
    x = rng.normal(size=(n, c, size, size))
    w = rng.normal(size=(o, c, k, k))
    b = rng.normal(size=o)
    out = conv2d(Tensor(x), _conv(w, b, stride=stride, padding=pad))
    np.testing.assert_allclose(out.data, _naive_conv(x, w, b, stride, pad), atol=1e-10)


def test_conv_without_bias_is_linear(rng):
    x = rng.normal(size=(2, 3, 6, 6))
    y = rng.normal(size=(2, 3, 6, 6))
    p = _conv(rng.normal(size=(4, 3, 3, 3)), padding=1)
    a, b = 1.7, -0.6
    combined = conv2d(Tensor(a * x + b * y), p).data
    separate = a * conv2d(Tensor(x), p).data + b * conv2d(Tensor(y), p).data
    np.testing.assert_allclose(combined, separate, atol=1e-10)


def test_conv_channel_mismatch():
    with pytest.raises(ShapeError):
        conv2d(Tensor(np.ones((1, 2, 4, 4))), _conv(np.ones((1, 3, 3, 3))))


def test_conv_non_positive_output():
    with pytest.raises(ShapeError):
        conv2d(Tensor(np.ones((1, 1, 2, 2))), _conv(np.ones((1, 1, 3, 3))))


# ── batchnorm2d ───────────────────────────────────────────────────────────────


def test_batchnorm_constant_input_gives_beta():
    p = _bn(2, gamma=3.0, beta=0.25)
    out = batchnorm2d(Tensor(np.full((2, 2, 3, 3), 7.0)), p, Mode.TRAIN)
    np.testing.assert_allclose(out.data, 0.25)


def test_batchnorm_symmetric_pair():
    x = Tensor(np.array([-1.0, 1.0]).reshape(2, 1, 1, 1))
    out = batchnorm2d(x, _bn(1), Mode.TRAIN)
    expected = 1.0 / math.sqrt(1.0 + 1e-5)
    np.testing.assert_allclose(out.data.reshape(-1), [-expected, expected], rtol=1e-12)
    assert expected == pytest.approx(0.999995, abs=1e-6)


def test_batchnorm_infer_with_unit_stats_is_identity(rng):
    # x/√(1+ε) stays within 1e-5 of x only while |x| ≤ 2
    x = rng.uniform(-1.0, 1.0, size=(2, 3, 4, 4)).astype(np.float32)
    out = batchnorm2d(Tensor(x), init_batchnorm(3), Mode.INFER)
    np.testing.assert_allclose(out.data, x, atol=1e-5)


def test_batchnorm_train_output_is_standardised(rng):
    x = Tensor(rng.normal(3.0, 2.0, size=(4, 2, 5, 5)))
    out = batchnorm2d(x, _bn(2), Mode.TRAIN).data
    np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 0.0, atol=1e-9)
    np.testing.assert_allclose(out.var(axis=(0, 2, 3)), 1.0, atol=1e-4)


def test_batchnorm_running_stats_momentum(rng):
    x = rng.normal(2.0, 1.5, size=(3, 1, 4, 4))
    p = _bn(1)
    batchnorm2d(Tensor(x), p, Mode.TRAIN)
    count = x.size
    unbiased = x.var() * count / (count - 1)
    np.testing.assert_allclose(p.running_mean.data, [0.1 * x.mean()])
    np.testing.assert_allclose(p.running_var.data, [0.9 + 0.1 * unbiased])


def test_batchnorm_infer_leaves_running_stats(rng):
    p = _bn(2, mean=0.5, var=2.0)
    before = (p.running_mean, p.running_var)
    batchnorm2d(Tensor(rng.normal(size=(2, 2, 3, 3))), p, Mode.INFER)
    assert (p.running_mean, p.running_var) == before


def test_batchnorm_empty_batch_rejected():
    with pytest.raises(ValueError):
        batchnorm2d(Tensor(np.zeros((0, 1, 2, 2))), _bn(1), Mode.TRAIN)


# ── maxpool2d ─────────────────────────────────────────────────────────────────


def test_maxpool_forced_max():
    out = maxpool2d(Tensor([[[[1.0, 2.0], [3.0, 4.0]]]]))
    np.testing.assert_array_equal(out.data, [[[[4.0]]]])


def test_maxpool_constant_halves_resolution():
    out = maxpool2d(Tensor(np.full((1, 2, 6, 6), 1.5)))
    assert out.shape == (1, 2, 3, 3)
    np.testing.assert_array_equal(out.data, 1.5)


@pytest.mark.parametrize("case", range(20))
def test_maxpool_matches_window_scan(case):
    rng = np.random.default_rng(100 + case)
    n, c = (int(v) for v in rng.integers(1, 4, size=2))
    h, w = (2 * int(v) for v in rng.integers(1, 5, size=2))
    x = rng.normal(size=(n, c, h, w))
    expected = np.empty((n, c, h // 2, w // 2))
    for i in range(n):
        for ch in range(c):
            for r in range(h // 2):
                for col in range(w // 2):
                    window = x[i, ch, 2 * r : 2 * r + 2, 2 * col : 2 * col + 2]
                    expected[i, ch, r, col] = window.max()
    np.testing.assert_array_equal(maxpool2d(Tensor(x)).data, expected)


def test_maxpool_output_within_input_range(rng):
    x = rng.normal(size=(3, 2, 8, 6))
    out = maxpool2d(Tensor(x)).data
    assert out.min() >= x.min()
    assert out.max() <= x.max()


def test_maxpool_odd_dims_rejected():
    with pytest.raises(ShapeError):
        maxpool2d(Tensor(np.zeros((1, 1, 3, 4))))


# ── relu / linear / pooling helpers ───────────────────────────────────────────


def test_relu_clamps_negatives():
    out = relu(Tensor([[-2.0, 0.0, 3.0]]))
    np.testing.assert_array_equal(out.data, [[0.0, 0.0, 3.0]])


def test_relu_is_idempotent(rng):
    x = Tensor(rng.normal(size=(2, 3, 4, 4)))
    once = relu(x)
    np.testing.assert_array_equal(relu(once).data, once.data)


def test_linear_equals_matmul_plus_broadcast_bias(rng):
    x = rng.normal(size=(5, 6))
    w = rng.normal(size=(3, 6))
    b = rng.normal(size=3)
    out = linear(Tensor(x), LinearParams(Tensor(w), Tensor(b)))
    np.testing.assert_allclose(out.data, np.matmul(x, w.T) + b[None, :], atol=1e-12)


def test_linear_identity_and_bias(rng):
    x = Tensor(rng.normal(size=(3, 4)))
    same = linear(x, LinearParams(Tensor(np.eye(4)), Tensor(np.zeros(4))))
    np.testing.assert_allclose(same.data, x.data)

    b = np.array([0.5, -1.0])
    zero = linear(x, LinearParams(Tensor(np.zeros((2, 4))), Tensor(b)))
    np.testing.assert_array_equal(zero.data, np.tile(b, (3, 1)))


def test_linear_dimension_mismatch():
    params = LinearParams(Tensor(np.zeros((2, 4))), Tensor(np.zeros(2)))
    with pytest.raises(ShapeError):
        linear(Tensor(np.zeros((2, 3))), params)


def test_avg_pool_and_pad_channels():
    x = Tensor(np.arange(16, dtype=np.float64).reshape(1, 1, 4, 4))
    pooled = avg_pool2d(x, 2)
    np.testing.assert_array_equal(pooled.data[0, 0], [[2.5, 4.5], [10.5, 12.5]])
    padded = pad_channels(pooled, 3)
    assert padded.shape == (1, 3, 2, 2)
    assert not padded.data[:, 1:].any()


# ── softmax cross-entropy ─────────────────────────────────────────────────────


def test_cross_entropy_uniform_is_ln2():
    loss = softmax_cross_entropy(Tensor(np.zeros((4, 2))), [0, 1, 1, 0])
    assert abs(loss.item() - math.log(2)) < 1e-6


def test_cross_entropy_saturated_correct():
    loss = softmax_cross_entropy(Tensor(np.array([[30.0, -30.0]])), [0])
    assert loss.item() < 1e-9


def test_cross_entropy_closed_form():
    loss = softmax_cross_entropy(Tensor(np.array([[1.0, -1.0]])), [0])
    assert loss.item() == pytest.approx(math.log1p(math.exp(-2.0)), abs=1e-12)
    assert loss.item() == pytest.approx(0.126928, abs=1e-6)


def test_cross_entropy_class_weights_scale_samples():
    logits = Tensor(np.zeros((2, 2)))
    loss = softmax_cross_entropy(logits, [0, 1], class_weights=(1.0, 3.0))
    assert loss.item() == pytest.approx(2.0 * math.log(2))


@pytest.mark.parametrize("seed", range(10))
def test_cross_entropy_non_negative_on_random_logits(seed):
    rng = np.random.default_rng(seed)
    logits = Tensor(rng.normal(scale=5.0, size=(8, 2)))
    labels = rng.integers(0, 2, size=8)
    assert softmax_cross_entropy(logits, labels).item() >= 0.0


def test_cross_entropy_label_out_of_range():
    with pytest.raises(ValueError):
        softmax_cross_entropy(Tensor(np.zeros((1, 2))), [2])
