"""Train, score and render one texture; handy for eyeballing a single configuration."""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from texinr import store
from texinr.config import load_run_file, train_job_from_run
from texinr.errors import DivergenceError
from texinr.evaluate import evaluate
from texinr.logs import setup_logging
from texinr.render import Camera, render_sphere
from texinr.train import run_name, train


# ==============================================
# Run one configuration
# ==============================================
def run_single(run_file, render=True):
    job = train_job_from_run(load_run_file(run_file))
    model_path = Path(job.out_dir) / f"{run_name(job)}.tinr"

    print("=" * 80)
    print(f"[{run_name(job)}] {job.image_path}")
    print("-" * 80)

    start = time.time()
    try:
        result = train(job)
    except DivergenceError as e:
        store.save(e.model, model_path)
        print(f"\n❌ Diverged at epoch {e.epoch}; last finite model kept at {model_path}")
        return None
    store.save(result.model, model_path)
    print(f"\n✅ Trained in {time.time() - start:.1f}s, final loss {result.losses[-1]:.6f}")

    record = evaluate(model_path, job.image_path, epochs=job.epochs)
    print(f"   PSNR {record.psnr:.2f} dB | SSIM {record.ssim:.4f} | {record.bpp:.3f} bpp (bucket {record.bucket})")

    if render:
        out = model_path.with_name(f"{model_path.stem}_sphere.png")
        render_sphere(model_path, Camera(), out_path=out)
        print(f"   Sphere: {out}")
    return record


# ==============================================
# Example Usage
# ==============================================
if __name__ == "__main__":
    setup_logging()
    run_single(
        run_file="benchmark/runs/train_single.json",  # change this file to try another configuration
        render=True,
    )
