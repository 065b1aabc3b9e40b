"""Decode a stored INR and score it against the reference texture."""

import logging
import math
from pathlib import Path

import numpy as np

from texinr import store
from texinr.errors import ShapeError
from texinr.imaging import (
    DEFAULT_LEVELS,
    build_pyramid,
    decode_image,
    decode_pyramid,
    load_image,
    lod_t,
    residual_image,
)
from texinr.metrics import EvalRecord, bits_per_pixel, bucket_bpp, mae, mse, psnr, ssim

log = logging.getLogger(__name__)


def score(decoded, reference, ssim_cfg=None):
    err = mse(decoded, reference)
    return {
        "mae": mae(decoded, reference),
        "mse": err,
        "psnr": psnr(err),
        "ssim": ssim(decoded, reference, ssim_cfg),
    }


def evaluate_levels(model, reference, ssim_cfg=None):
    """Per-level scores; a single entry for (u, v) models."""
    if model.spec.input_dim == 2:
        decoded = decode_image(model, reference.width, reference.height)
        row = score(decoded, reference, ssim_cfg)
        row.update(level=0, pixels=reference.width * reference.height)
        return [row]

    levels = model.lod_levels or DEFAULT_LEVELS
    pyramid = build_pyramid(reference, levels)
    decoded = decode_pyramid(model, reference.width, reference.height, levels)
    rows = []
    for level, (dec, ref) in enumerate(zip(decoded.levels, pyramid.levels)):
        if dec.shape != ref.shape:
            raise ShapeError(f"level {level}: decoded {dec.shape} vs reference {ref.shape}")
        row = score(dec, ref, ssim_cfg)
        row.update(level=level, pixels=ref.width * ref.height)
        rows.append(row)
    return rows


def base_residual(model, reference):
    """Residual of the level-0 decode against the reference."""
    t = None
    if model.spec.input_dim == 3:
        t = lod_t(0, model.lod_levels or DEFAULT_LEVELS)
    return residual_image(decode_image(model, reference.width, reference.height, t=t), reference)


def _weighted(rows, key):
    values = np.array([r[key] for r in rows], dtype=np.float64)
    weights = np.array([r["pixels"] for r in rows], dtype=np.float64)
    if np.isinf(values).any():
        return math.inf
    return float(np.average(values, weights=weights))


def evaluate_model(
    model,
    reference,
    image="",
    optimizer="",
    lr=None,
    epochs=None,
    seconds=None,
    ssim_cfg=None,
    model_id="",
):
    """EvalRecord with pixel-count-weighted means over mip levels and bpp of the base image."""
    rows = evaluate_levels(model, reference, ssim_cfg)
    bpp = bits_per_pixel(model.param_count, reference.width, reference.height)
    spec = model.spec
    return EvalRecord(
        image=image,
        arch=spec.arch,
        width=spec.hidden_width,
        depth=spec.hidden_count,
        optimizer=optimizer,
        lr=lr,
        epochs=epochs,
        params=model.param_count,
        bpp=bpp,
        bucket=bucket_bpp(bpp),
        mae=_weighted(rows, "mae"),
        mse=_weighted(rows, "mse"),
        psnr=_weighted(rows, "psnr"),
        ssim=_weighted(rows, "ssim"),
        seconds=seconds,
        model_id=model_id,
    )


def evaluate(model_path, reference_path, ssim_cfg=None, **fields):
    model = store.load(model_path)
    reference = load_image(reference_path)
    record = evaluate_model(
        model,
        reference,
        image=fields.pop("image", Path(reference_path).stem),
        model_id=fields.pop("model_id", Path(model_path).stem),
        ssim_cfg=ssim_cfg,
        **fields,
    )
    log.info("[OK] %s vs %s: PSNR %.2f dB, SSIM %.4f", model_path, reference_path, record.psnr, record.ssim)
    return record
