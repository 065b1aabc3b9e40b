import math

import numpy as np
import pytest

from texinr import store
from texinr.errors import ShapeError
from texinr.evaluate import base_residual, evaluate, evaluate_levels, evaluate_model
from texinr.imaging import build_pyramid, decode_image, lod_t, residual_image, save_image
from texinr.metrics import bits_per_pixel, bucket_bpp
from texinr.network import arch_spec, init

from conftest import smooth_image


def test_self_comparison_is_perfect():
    model = init(arch_spec("fourier_mlp", 16, 1, n_frequencies=2), 0)
    reference = decode_image(model, 12, 10)
    record = evaluate_model(model, reference, image="self")
    assert record.psnr_infinite and math.isinf(record.psnr)
    assert record.ssim == 1.0
    assert record.mae == 0.0 and record.mse == 0.0


def test_record_fields():
    model = init(arch_spec("sine_mlp", 32, 2), 0)
    reference = smooth_image(16, 8)
    record = evaluate_model(model, reference, image="tex", optimizer="adam", lr=1e-4, epochs=50, seconds=1.5)
    assert record.bpp == bits_per_pixel(model.param_count, 16, 8)
    assert record.bucket == bucket_bpp(record.bpp)
    assert (record.arch, record.width, record.depth) == ("sine_mlp", 32, 2)
    assert record.params == model.param_count
    assert record.seconds == 1.5


def test_mipmap_weighting():
    model = init(arch_spec("mlp", 16, 1, mipmap=True), 0, lod_levels=3)
    reference = smooth_image(16, 16)
    rows = evaluate_levels(model, reference)
    assert [r["pixels"] for r in rows] == [256, 64, 16]

    record = evaluate_model(model, reference)
    for key in ("mae", "mse", "psnr", "ssim"):
        expected = sum(r[key] * r["pixels"] for r in rows) / sum(r["pixels"] for r in rows)
        assert getattr(record, key) == pytest.approx(expected, rel=1e-12)
    assert record.bpp == bits_per_pixel(model.param_count, 16, 16)


def test_mipmap_levels_against_pyramid():
    model = init(arch_spec("mlp", 16, 1, mipmap=True), 0, lod_levels=2)
    reference = smooth_image(8, 8)
    rows = evaluate_levels(model, reference)
    pyramid = build_pyramid(reference, 2)
    assert len(rows) == pyramid.level_count


def test_reference_too_small_for_levels():
    model = init(arch_spec("mlp", 16, 1, mipmap=True), 0, lod_levels=6)
    with pytest.raises(ShapeError):
        evaluate_model(model, smooth_image(8, 8))


def test_evaluate_from_files(tmp_path):
    model = init(arch_spec("mlp", 16, 1), 0)
    model_path = store.save(model, tmp_path / "m.tinr")
    ref_path = save_image(smooth_image(8, 8), tmp_path / "ref.png")
    record = evaluate(model_path, ref_path, epochs=3)
    assert record.image == "ref"
    assert record.model_id == "m"
    assert record.epochs == 3
    assert np.isfinite(record.psnr)


def test_base_residual_uses_level_zero():
    model = init(arch_spec("mlp", 16, 1, mipmap=True), 0, lod_levels=3)
    reference = smooth_image(12, 8)
    expected = residual_image(decode_image(model, 12, 8, t=lod_t(0, 3)), reference)
    np.testing.assert_array_equal(base_residual(model, reference).pixels, expected.pixels)


def test_base_residual_of_exact_decode_is_black():
    model = init(arch_spec("fourier_mlp", 16, 1, n_frequencies=2), 0)
    np.testing.assert_array_equal(base_residual(model, decode_image(model, 6, 5)).pixels, 0.0)
