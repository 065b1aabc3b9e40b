"""
Command-line entry point: select / train / decode / eval / sweep / render.

    python -m texinr select data/textures -n 25 -o results/manifest.tsv
    python -m texinr train --image tex.png --arch fourier_mlp --width 128 --depth 2
    python -m texinr sweep --config benchmark/runs/mini_sweep.json --no-timing
"""

import argparse
import logging
import math
import sys
from pathlib import Path

from rich.console import Console
from rich.table import Table

from texinr import store
from texinr.config import (
    grid_from_run,
    load_env,
    load_run_file,
    merge_overrides,
    results_dir,
    train_job_from_run,
    validate_run,
)
from texinr.corpus import index_corpus, lapv_histogram, read_manifest, select_entries, write_manifest
from texinr.errors import DivergenceError, TexInrError
from texinr.evaluate import base_residual, evaluate
from texinr.imaging import DEFAULT_LEVELS, decode_image, decode_pyramid, load_image, pack_atlas, save_image
from texinr.logs import setup_logging
from texinr.metrics import GLOBAL, LOCAL, SsimConfig
from texinr.network import ARCHITECTURES
from texinr.optim import ADAM, RPROP
from texinr.render import DEFAULT_TEXTURE_SIZE, Camera, render_sphere
from texinr.sweep import records_frame, sweep
from texinr.train import run_name, train

log = logging.getLogger("texinr.cli")
console = Console()


# ============================================================
# Console tables
# ============================================================
def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return "inf" if math.isinf(value) else f"{value:.4f}"
    return str(value)


def print_records(records, title):
    table = Table(title=title)
    cols = ["image", "arch", "width", "depth", "optimizer", "bpp", "bucket", "mae", "psnr", "ssim"]
    for c in cols:
        table.add_column(c, justify="left" if c in ("image", "arch", "optimizer") else "right")
    for r in records:
        table.add_row(*(_fmt(getattr(r, c)) for c in cols))
    console.print(table)


def print_series(series):
    table = Table(title="PSNR by bpp bucket")
    for c in ("arch", "optimizer", "bucket", "mean", "std", "count"):
        table.add_column(c)
    for (arch, metric), frame in sorted(series.items()):
        if metric != "psnr":
            continue
        for row in frame.itertuples(index=False):
            table.add_row(arch, row.optimizer, str(row.bucket), _fmt(row.mean), _fmt(row.std), str(row.count))
    console.print(table)


# ============================================================
# Subcommands
# ============================================================
def cmd_select(args):
    index = index_corpus(args.corpus, workers=args.workers)
    picks = select_entries(index, args.n)
    path = write_manifest(picks, args.output)
    if args.histogram:
        counts, edges, cdf = lapv_histogram(index, bins=args.histogram)
        table = Table(title="LAPV distribution")
        for c in ("from", "to", "count", "cdf"):
            table.add_column(c, justify="right")
        for i, n in enumerate(counts):
            table.add_row(f"{edges[i]:.1f}", f"{edges[i + 1]:.1f}", str(n), f"{cdf[i]:.3f}")
        console.print(table)
    log.info("[DONE] selected %d of %d images -> %s", len(picks), len(index), path)
    return 0


def _train_overrides(args):
    return {
        "image": args.image,
        "architecture": args.arch,
        "width": args.width,
        "depth": args.depth,
        "optimizer": args.optimizer,
        "learning_rate": args.lr,
        "epochs": args.epochs,
        "seed": args.seed,
        "mipmap": True if args.mipmap else None,
        "levels": args.levels,
        "n_frequencies": args.n_frequencies,
        "omega0": args.omega0,
        "batch_size": args.batch_size,
        "snapshot_epochs": args.snapshots,
        "out_dir": args.out_dir,
    }


def cmd_train(args):
    run = load_run_file(args.config) if args.config else {}
    run = validate_run(merge_overrides(run, _train_overrides(args)))
    job = train_job_from_run(run)
    model_path = Path(job.out_dir) / f"{run_name(job)}.tinr"
    try:
        result = train(job)
    except DivergenceError as e:
        store.save(e.model, model_path)
        log.error("[ERROR] %s; last finite model kept at %s", e, model_path)
        return 1
    store.save(result.model, model_path)
    log.info("[DONE] %s", model_path)
    log.info(" - loss curve: %s", result.curve_path)
    for epoch, png in sorted(result.snapshots.items()):
        log.info(" - epoch %d: %s", epoch, png)
    return 0


def _decode_size(args):
    if args.reference:
        ref = load_image(args.reference)
        return ref.width, ref.height
    if args.size:
        return args.size
    raise TexInrError("decode needs --reference or --size W H")


def cmd_decode(args):
    model = store.load(args.model)
    width, height = _decode_size(args)
    if model.spec.input_dim == 3:
        pyramid = decode_pyramid(model, width, height, model.lod_levels or DEFAULT_LEVELS)
        img = pack_atlas(pyramid)
    else:
        img = decode_image(model, width, height)
    Path(args.output).parent.mkdir(parents=True, exist_ok=True)
    save_image(img, args.output)
    if args.verbose:
        console.print(store.describe_asset(args.model))
    log.info("[DONE] decoded %s -> %s", args.model, args.output)
    return 0


def cmd_eval(args):
    cfg = SsimConfig(window=args.ssim_window)
    record = evaluate(args.model, args.reference, ssim_cfg=cfg)
    print_records([record], f"eval {Path(args.model).name}")
    if args.csv:
        path = Path(args.csv)
        path.parent.mkdir(parents=True, exist_ok=True)
        records_frame([record]).to_csv(path, mode="a", header=not path.exists(), index=False, na_rep="")
        log.info("[OK] appended to %s", path)
    if args.residual:
        path = Path(args.residual)
        path.parent.mkdir(parents=True, exist_ok=True)
        save_image(base_residual(store.load(args.model), load_image(args.reference)), path)
        log.info("[OK] residual -> %s", path)
    return 0


def _sweep_images(run):
    if run.get("images"):
        return list(run["images"])
    if run.get("manifest"):
        return [e.path for e in read_manifest(run["manifest"])]
    raise TexInrError("sweep needs --manifest or --images")


def cmd_sweep(args):
    run = load_run_file(args.config) if args.config else {}
    overrides = {
        "manifest": args.manifest,
        "images": args.images,
        "architectures": args.archs,
        "optimizers": args.optimizers,
        "epochs": args.epochs,
        "seed": args.seed,
        "learning_rate": args.lr,
        "mipmap": True if args.mipmap else None,
        "levels": args.levels,
        "batch_size": args.batch_size,
        "workers": args.workers,
        "job_timeout": args.timeout,
        "record_seconds": False if args.no_timing else None,
        "snapshots": True if args.snapshots else None,
        "out_dir": args.out_dir,
    }
    run = validate_run(merge_overrides(run, overrides))
    grid = grid_from_run(run)
    out_dir = Path(run.get("out_dir") or results_dir() / "sweep")
    report = sweep(_sweep_images(run), grid, out_dir)
    print_series(report.series)
    return 1 if report.failures and not report.records else 0


def cmd_render(args):
    camera = Camera(args.width, args.height, args.fov, args.distance)
    render_sphere(
        args.model,
        camera=camera,
        light_dir=tuple(args.light),
        background=tuple(args.background),
        texture_size=(args.texture_size, args.texture_size) if args.texture_size else None,
        out_path=args.output,
    )
    log.info("[DONE] %s", args.output)
    return 0


# ============================================================
# Parser
# ============================================================
def build_parser():
    parser = argparse.ArgumentParser(prog="texinr", description="INR texture compression benchmark")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--env-file", default=None, help="Optional .env file with TEXINR_* variables")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("select", help="Index a corpus by LAPV and pick N images at regular ranks")
    p.add_argument("corpus", help="Directory of PNG/JPEG textures")
    p.add_argument("-n", type=int, default=25, help="Number of images to select")
    p.add_argument("-o", "--output", default="results/manifest.tsv")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--histogram", type=int, default=0, metavar="BINS", help="Print an LAPV histogram")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("train", help="Overfit one INR to one texture")
    p.add_argument("--config", help="JSON run file")
    p.add_argument("--image")
    p.add_argument("--arch", choices=ARCHITECTURES)
    p.add_argument("--width", type=int)
    p.add_argument("--depth", type=int)
    p.add_argument("--optimizer", choices=(ADAM, RPROP))
    p.add_argument("--lr", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--mipmap", action="store_true")
    p.add_argument("--levels", type=int)
    p.add_argument("--n-frequencies", type=int)
    p.add_argument("--omega0", type=float)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--snapshots", type=int, nargs="*", help="Snapshot epochs")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("decode", help="Decode a .tinr model to PNG")
    p.add_argument("model")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--reference", help="Take the output size from this image")
    p.add_argument("--size", type=int, nargs=2, metavar=("W", "H"))
    p.add_argument("-v", "--verbose", action="store_true", help="Print the asset layout")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("eval", help="Score a .tinr model against its reference texture")
    p.add_argument("model")
    p.add_argument("reference")
    p.add_argument("--ssim-window", choices=(GLOBAL, LOCAL), default=GLOBAL)
    p.add_argument("--csv", help="Append the record to this CSV")
    p.add_argument("--residual", metavar="PNG", help="Write |decoded - reference| scaled to the largest error")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="Run the architecture x optimizer grid over a manifest")
    p.add_argument("--config", help="JSON run file")
    p.add_argument("--manifest")
    p.add_argument("--images", nargs="+")
    p.add_argument("--archs", nargs="+", choices=ARCHITECTURES)
    p.add_argument("--optimizers", nargs="+", choices=(ADAM, RPROP))
    p.add_argument("--epochs", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--mipmap", action="store_true")
    p.add_argument("--levels", type=int)
    p.add_argument("--batch-size", type=int)
    p.add_argument("--workers", type=int)
    p.add_argument("--timeout", type=int, help="Per-job wall-clock limit in seconds (0 = none)")
    p.add_argument("--no-timing", action="store_true", help="Leave the seconds column empty")
    p.add_argument("--snapshots", action="store_true", help="Dump learning snapshots per job")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("render", help="Ray-trace a sphere textured by a .tinr model")
    p.add_argument("model")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--width", type=int, default=256)
    p.add_argument("--height", type=int, default=256)
    p.add_argument("--fov", type=float, default=40.0)
    p.add_argument("--distance", type=float, default=3.0)
    p.add_argument("--light", type=float, nargs=3, default=(1.0, 1.0, 1.0))
    p.add_argument("--background", type=float, nargs=3, default=(0.0, 0.0, 0.0))
    p.add_argument(
        "--texture-size",
        type=int,
        default=None,
        help=f"Level-0 texture side for mip selection (default: stored base size, else {DEFAULT_TEXTURE_SIZE})",
    )
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    load_env(args.env_file)
    setup_logging(args.log_level)
    try:
        return args.func(args)
    except TexInrError as e:
        log.error("[ERROR] %s: %s", type(e).__name__, e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
