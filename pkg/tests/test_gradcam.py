"""Grad-CAM heatmaps, overlays and the heatmap grid format."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from src.data import BoundingBox
from src.explain import Heatmap, colormap, gradcam, overlay, read_heatmap_grid, write_heatmap_grid
from src.model import Model
from src.tensor import ShapeError, Tensor


def _image(rng: np.random.Generator, size: int = 16) -> Tensor:
    return Tensor(rng.normal(size=(3, size, size)), dtype=np.float32)


def _active_class(model: Model, image: Tensor) -> int:
    for c in (0, 1):
        if gradcam(model, image, c).raw_max > 0:
            return c
    pytest.skip("both classes give an all-zero map for this seed")


# ── gradcam ───────────────────────────────────────────────────────────────────


def test_heatmap_shape_and_range(tiny_model, rng):
    for c in (0, 1):
        heat = gradcam(tiny_model, _image(rng), c)
        assert heat.values.shape == (16, 16)
        assert heat.values.min() >= 0.0 and heat.values.max() <= 1.0
        if heat.raw_max > 0:
            assert heat.values.max() == pytest.approx(1.0, abs=0.05)
        else:
            assert not heat.values.any()


def test_batched_image_accepted(tiny_model, rng):
    image = _image(rng)
    a = gradcam(tiny_model, image, 1)
    b = gradcam(tiny_model, Tensor.wrap(image.data.reshape(1, 3, 16, 16)), 1)
    np.testing.assert_array_equal(a.values, b.values)


def test_zero_head_weights_give_zero_map(tiny_model, rng):
    tiny_model.set_state({"head.weights": Tensor.zeros_like(tiny_model.head.weights)})
    heat = gradcam(tiny_model, _image(rng), 1)
    assert heat.raw_max == 0.0
    assert not heat.values.any()


def test_scaling_the_target_row_leaves_the_map(tiny_model, rng):
    image = _image(rng)
    c = _active_class(tiny_model, image)
    before = gradcam(tiny_model, image, c).values
    weights = tiny_model.head.weights.data.copy()
    weights[c] *= 3.0
    tiny_model.set_state({"head.weights": Tensor(weights)})
    np.testing.assert_allclose(gradcam(tiny_model, image, c).values, before, atol=1e-5)


def test_gradcam_is_deterministic(tiny_model, rng):
    image = _image(rng)
    a = gradcam(tiny_model, image, 1).values
    b = gradcam(tiny_model, image, 1).values
    assert a.tobytes() == b.tobytes()


def test_concurrent_calls_match_sequential(tiny_model, rng):
    images = [_image(rng) for _ in range(6)]
    sequential = [gradcam(tiny_model, im, 1).values for im in images]
    with ThreadPoolExecutor(max_workers=3) as pool:
        parallel = list(pool.map(lambda im: gradcam(tiny_model, im, 1).values, images))
    for s, p in zip(sequential, parallel):
        np.testing.assert_array_equal(s, p)


def test_gradcam_leaves_model_untouched(tiny_model, rng):
    before = tiny_model.checksum()
    gradcam(tiny_model, _image(rng), 0)
    assert tiny_model.checksum() == before


def test_gradcam_rejects_bad_class_and_shape(tiny_model, rng):
    with pytest.raises(ValueError):
        gradcam(tiny_model, _image(rng), 2)
    with pytest.raises(ShapeError):
        gradcam(tiny_model, _image(rng, size=24), 0)


# ── mass fraction ─────────────────────────────────────────────────────────────


def test_mass_fraction_of_boxed_heat():
    values = np.zeros((20, 20))
    values[5:9, 6:10] = 1.0
    heat = Heatmap(values=values, target_class=1, raw_max=1.0)
    assert heat.mass_fraction(BoundingBox(6, 5, 10, 9), dilation=0.0) == 1.0
    assert heat.mass_fraction(BoundingBox(6, 5, 8, 9), dilation=0.0) == 0.5
    # 10% of 20 pixels = 2 pixels of slack on every side
    assert heat.mass_fraction(BoundingBox(8, 7, 10, 9), dilation=0.1) == 1.0
    assert Heatmap(np.zeros((4, 4)), 1, 0.0).mass_fraction(BoundingBox(0, 0, 4, 4)) == 0.0


# ── overlay ───────────────────────────────────────────────────────────────────


def test_overlay_alpha_zero_is_identity(make_image, rng):
    image = make_image(8)
    heat = Heatmap(rng.uniform(size=(8, 8)), 1, 1.0)
    np.testing.assert_array_equal(overlay(image, heat, alpha=0.0), image)


def test_overlay_zero_heatmap_is_identity(make_image):
    image = make_image(8)
    blank = Heatmap(np.zeros((8, 8)), 1, 0.0)
    np.testing.assert_array_equal(overlay(image, blank, alpha=1.0), image)


def test_overlay_full_heat_is_peak_color(make_image):
    out = overlay(make_image(8), Heatmap(np.ones((8, 8)), 1, 1.0), alpha=1.0)
    assert (out == np.array([255, 0, 0], dtype=np.uint8)).all()


def test_overlay_size_and_alpha_checks(make_image):
    with pytest.raises(ValueError):
        overlay(make_image(8), Heatmap(np.zeros((6, 6)), 1, 0.0))
    with pytest.raises(ValueError):
        overlay(make_image(8), Heatmap(np.zeros((8, 8)), 1, 0.0), alpha=1.5)


def test_colormap_endpoints():
    np.testing.assert_array_equal(colormap(np.array([0.0, 1.0])), [[0, 0, 255], [255, 0, 0]])


# ── grid I/O ──────────────────────────────────────────────────────────────────


def test_heatmap_grid_round_trip(tmp_path, rng):
    heat = Heatmap(rng.uniform(size=(8, 8)), 1, 2.5)
    path = tmp_path / "heat.txt"
    write_heatmap_grid(heat, path)
    assert path.read_text().splitlines()[0] == "P-HEAT 8 8"
    np.testing.assert_allclose(read_heatmap_grid(path), heat.values, rtol=1e-8)


def test_heatmap_grid_rejects_other_files(tmp_path):
    path = tmp_path / "other.txt"
    path.write_text("P-OTHER 2 2\n0 0\n0 0\n")
    with pytest.raises(ValueError):
        read_heatmap_grid(path)
