"""
Rate-distortion sweep over images x architectures x (width, depth) x optimizers.
-------------------------------------------------------------------------------

Every job trains one model, stores it, and scores it. Results are collected
in manifest order into a flat CSV (one EvalRecord per row); bucketed series
are then derived from that CSV, so re-deriving them never disagrees with it.
Failed or timed-out jobs are written to an error-ids report and the sweep
carries on.
"""

import dataclasses
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import pandas as pd
from tqdm import tqdm

from texinr import store
from texinr.config import TrainJob
from texinr.errors import JobTimeout, time_limit
from texinr.evaluate import evaluate_model
from texinr.imaging import load_image
from texinr.train import run_name, train

log = logging.getLogger(__name__)

CSV_COLUMNS = [
    "image",
    "arch",
    "width",
    "depth",
    "optimizer",
    "lr",
    "epochs",
    "params",
    "bpp",
    "bucket",
    "mae",
    "mse",
    "psnr",
    "ssim",
    "seconds",
    # reserved, always empty
    "lpips",
    "vmaf",
]
SERIES_METRICS = ("mae", "mse", "psnr", "ssim")


@dataclass(frozen=True)
class SweepJob:
    job_id: str
    image: str
    arch: str
    width: int
    depth: int
    optimizer: str


@dataclass
class SweepReport:
    records: list
    failures: list
    csv_path: Path = None
    error_ids_path: Path = None
    series: dict = field(default_factory=dict)


def plan_jobs(images, grid):
    """Image-major job list; each architecture contributes len(grid.pairs) x optimizers jobs."""
    grid.validate()
    jobs = []
    for image in images:
        for arch in grid.architectures:
            for width, depth in grid.pairs:
                for opt in grid.optimizers:
                    job_id = f"J{len(jobs):05d}"
                    jobs.append(SweepJob(job_id, str(image), arch, width, depth, opt))
    return jobs


def _train_job(job, grid, out_dir):
    spec = grid.spec_for(job.arch, job.width, job.depth)
    return TrainJob(
        image_path=job.image,
        spec=spec,
        optimizer=grid.optimizer_for(spec, job.optimizer),
        epochs=grid.epochs,
        seed=grid.seed,
        mipmap=grid.mipmap,
        levels=grid.levels,
        snapshot_epochs=None if grid.snapshots else (),
        batch_size=grid.batch_size,
        out_dir=str(out_dir / "snapshots") if grid.snapshots else None,
    )


def run_job(payload):
    """Train, store and evaluate one job; never raises."""
    job, grid, out_dir = payload
    out_dir = Path(out_dir)
    try:
        with time_limit(grid.job_timeout):
            tj = _train_job(job, grid, out_dir)
            reference = load_image(job.image)
            result = train(tj, image=reference, progress=False)
            model_path = out_dir / "models" / f"{job.job_id}_{run_name(tj)}.tinr"
            store.save(result.model, model_path)
            # score the stored asset, not the float64 training copy
            record = evaluate_model(
                store.load(model_path),
                reference,
                image=Path(job.image).stem,
                optimizer=tj.optimizer.kind,
                lr=tj.optimizer.learning_rate,
                epochs=tj.epochs,
                seconds=round(result.seconds, 3) if grid.record_seconds else None,
                model_id=model_path.stem,
            )
        return job, record, None
    except JobTimeout as e:
        return job, None, {"error": str(e), "error_type": "timeout"}
    except Exception as e:
        return job, None, {"error": f"{type(e).__name__}: {e}", "error_type": "execution_error"}


def _execute(payloads, workers):
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            yield from pool.map(run_job, payloads)
    else:
        yield from map(run_job, payloads)


# ============================================================
# Reports
# ============================================================
def records_frame(records):
    rows = []
    for r in records:
        row = dataclasses.asdict(r)
        row.pop("model_id", None)
        row["lpips"] = None
        row["vmaf"] = None
        rows.append(row)
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def write_csv(records, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records_frame(records).to_csv(path, index=False, na_rep="")
    return path


def bucket_series(csv_path):
    """{(arch, metric): frame[optimizer, bucket, mean, std, count]} derived from the CSV."""
    df = pd.read_csv(csv_path)
    series = {}
    for arch, part in df.groupby("arch", sort=True):
        for metric in SERIES_METRICS:
            agg = (
                part.groupby(["optimizer", "bucket"], sort=True)[metric]
                .agg(["mean", "std", "count"])
                .reset_index()
            )
            agg.loc[agg["count"] < 2, "std"] = 0.0
            series[(arch, metric)] = agg
    return series


def write_series(series, directory):
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for (arch, metric), frame in sorted(series.items()):
        path = directory / f"{arch}_{metric}_bucket_bpp.tsv"
        frame.to_csv(path, sep="\t", index=False)
        paths.append(path)
    return paths


def write_error_ids(failures, total, path):
    timeout_ids = [f["id"] for f in failures if f["error_type"] == "timeout"]
    with open(path, "w", encoding="utf-8") as err_file:
        if not failures:
            err_file.write("No errors found. All jobs finished successfully!\n")
            return path

        err_file.write(f"Total errors: {len(failures)} out of {total} jobs\n")
        err_file.write(f"Error rate: {len(failures) / total * 100:.2f}%\n")
        err_file.write(f"Timeout errors: {len(timeout_ids)}\n")
        err_file.write(f"Execution errors: {len(failures) - len(timeout_ids)}\n")
        err_file.write("=" * 80 + "\n\n")

        err_file.write("Error IDs:\n")
        err_file.write("-" * 80 + "\n")
        for f in failures:
            err_file.write(f"{f['id']}\n")

        if timeout_ids:
            err_file.write("\n" + "=" * 80 + "\n")
            err_file.write("Timeout IDs:\n")
            err_file.write("-" * 80 + "\n")
            for tid in timeout_ids:
                err_file.write(f"{tid}\n")

        err_file.write("\n" + "=" * 80 + "\n")
        err_file.write("Detailed Error Information:\n")
        err_file.write("=" * 80 + "\n\n")
        for f in failures:
            err_file.write(f"ID: {f['id']}\n")
            err_file.write(f"Job: {f['job']}\n")
            err_file.write(f"Error Type: {f['error_type']}\n")
            err_file.write(f"Error: {f['error']}\n")
            err_file.write("-" * 80 + "\n\n")
    return path


# ============================================================
# Main sweep
# ============================================================
def sweep(images, grid, out_dir):
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = plan_jobs(images, grid)
    log.info("[SWEEP] %d images x %d architectures -> %d jobs", len(images), len(grid.architectures), len(jobs))

    start = time.perf_counter()
    records, failures = [], []
    payloads = [(job, grid, str(out_dir)) for job in jobs]
    for job, record, error in tqdm(_execute(payloads, grid.workers), total=len(jobs), desc="sweep"):
        if record is not None:
            records.append(record)
            log.info("[OK] %s %s PSNR=%.2f bpp=%.3f", job.job_id, record.model_id, record.psnr, record.bpp)
        else:
            tag = "[TIMEOUT]" if error["error_type"] == "timeout" else "[ERROR]"
            log.error("%s %s: %s", tag, job.job_id, error["error"])
            failures.append({"id": job.job_id, "job": job, **error})

    csv_path = write_csv(records, out_dir / "results.csv")
    error_path = write_error_ids(failures, len(jobs), out_dir / "sweep_error_ids.txt")
    series = bucket_series(csv_path) if records else {}
    write_series(series, out_dir / "series")

    log.info("[DONE] %d/%d jobs in %.1fs", len(records), len(jobs), time.perf_counter() - start)
    log.info(" - %s", csv_path)
    log.info(" - %s", error_path)
    return SweepReport(records, failures, csv_path, error_path, series)
