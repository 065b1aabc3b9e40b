"""
Overfit an INR to one texture (or its mipmap pyramid).

Loss is the mean squared error over every sample in [0, 1] pixel space.
The default is one full-batch gradient step per epoch.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from tqdm import tqdm

from texinr import store
from texinr.errors import DivergenceError, NumericError
from texinr.imaging import (
    build_dataset,
    build_mipmap_dataset,
    build_pyramid,
    decode_image,
    decode_pyramid,
    load_image,
    pack_atlas,
    save_image,
)
from texinr.network import forward_with_tape, init, quantize32
from texinr.optim import make_optimizer

log = logging.getLogger(__name__)


@dataclass
class TrainResult:
    model: object
    losses: list
    snapshots: dict = field(default_factory=dict)
    seconds: float = 0.0
    name: str = ""
    curve_path: Path = None


def run_name(job, epoch=None):
    """uv_fourier_mlp_128x2_potholed_0113_50_1e-3_adam style names."""
    parts = [job.spec.tag]
    if job.mipmap:
        parts.append(f"mipmap_{job.levels}")
    parts.append(Path(job.image_path).stem)
    parts.append(str(job.epochs if epoch is None else epoch))
    parts += [job.optimizer.lr_tag, job.optimizer.kind]
    return "_".join(parts)


def training_set(job, image=None):
    image = image if image is not None else load_image(job.image_path)
    if job.mipmap:
        return build_mipmap_dataset(build_pyramid(image, job.levels)), image
    return build_dataset(image), image


def mse_loss(pred, target):
    diff = pred - target
    return float(np.mean(diff * diff)), 2.0 * diff / diff.size


def _epoch(model, params, optimizer, data, batch_size, rng):
    """One pass over the data; returns the mean loss seen before each update."""
    n = len(data)
    if batch_size is None or batch_size >= n:
        batches = [slice(None)]
    else:
        order = rng.permutation(n)
        batches = [order[i : i + batch_size] for i in range(0, n, batch_size)]

    total = 0.0
    for idx in batches:
        coords, target = data.coords[idx], data.rgb[idx]
        pred, tape = forward_with_tape(model, coords)
        loss, grad = mse_loss(pred, target)
        if not np.isfinite(loss):
            return loss
        total += loss * target.shape[0]
        optimizer.step(params, tape.backward(grad))
    return total / n


def _snapshot(model, job, image, epoch, out_dir):
    """PNG of the stored (float32) weights plus the matching checkpoint."""
    stem = out_dir / run_name(job, epoch)
    model = quantize32(model)
    if job.mipmap:
        picture = pack_atlas(decode_pyramid(model, image.width, image.height, job.levels))
    else:
        picture = decode_image(model, image.width, image.height)
    png = save_image(picture, stem.with_suffix(".png"))
    store.save(model, stem.with_suffix(".tinr"))
    return png


def write_loss_curve(losses, path):
    with open(path, "w", encoding="utf-8") as f:
        for epoch, loss in enumerate(losses, start=1):
            f.write(f"{epoch}\t{loss!r}\n")
    return path


def train(job, image=None, progress=True):
    """Run `job`; snapshots, checkpoints and the loss curve go to job.out_dir if set."""
    job.validate()
    data, image = training_set(job, image)
    out_dir = Path(job.out_dir) if job.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)

    model = init(
        job.spec,
        job.seed,
        lod_levels=job.levels if job.mipmap else 0,
        base_size=(image.width, image.height),
    ).copy()
    params = model.params()
    optimizer = make_optimizer(job.optimizer)
    rng = np.random.default_rng(job.seed + 1)

    losses, snapshots = [], {}
    last_good = model.copy()
    start = time.perf_counter()
    log.info("[TRAIN] %s (%d samples, %d params)", run_name(job), len(data), model.param_count)

    for epoch in tqdm(range(1, job.epochs + 1), desc=run_name(job), disable=not progress, leave=False):
        before = model.copy()
        try:
            loss = _epoch(model, params, optimizer, data, job.batch_size, rng)
        except NumericError as e:
            loss = float("nan")
            log.debug("non-finite values at epoch %d: %s", epoch, e)
        if not np.isfinite(loss):
            log.error("[ERROR] %s diverged at epoch %d", run_name(job), epoch)
            if out_dir:
                write_loss_curve(losses, out_dir / f"{run_name(job)}_loss.tsv")
            raise DivergenceError(
                f"non-finite loss at epoch {epoch}", model=last_good, epoch=epoch, losses=losses
            )
        last_good = before
        losses.append(loss)

        if out_dir and epoch in job.snapshot_epochs:
            snapshots[epoch] = _snapshot(model, job, image, epoch, out_dir)

    seconds = time.perf_counter() - start
    curve = None
    if out_dir:
        curve = write_loss_curve(losses, out_dir / f"{run_name(job)}_loss.tsv")
    log.info("[DONE] %s final loss %.6g in %.1fs", run_name(job), losses[-1], seconds)
    return TrainResult(model, losses, snapshots, seconds, run_name(job), curve)
