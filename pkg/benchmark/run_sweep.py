"""Run a sweep from a JSON run file and print the PSNR-by-bucket table.

Edit the paths in __main__ and run from the repository root:

    python benchmark/run_sweep.py
"""

import os
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from texinr.cli import print_records, print_series
from texinr.config import grid_from_run, load_env, load_run_file
from texinr.corpus import read_manifest
from texinr.logs import setup_logging
from texinr.sweep import sweep


# ============================================================
# Main execution
# ============================================================
def run_sweep(run_file, manifest=None):
    run = load_run_file(run_file)
    manifest = manifest or run.get("manifest")
    if run.get("images"):
        images = run["images"]
    elif manifest and os.path.exists(manifest):
        images = [e.path for e in read_manifest(manifest)]
    else:
        print(f"Missing manifest: {manifest}. Run `python -m texinr select` first.")
        return None

    grid = grid_from_run(run)
    report = sweep(images, grid, run.get("out_dir", "results/sweep"))

    print("=" * 80)
    print_records(report.records, f"{Path(run_file).stem}: {len(report.records)} models")
    print_series(report.series)
    print("=" * 80)
    print(f"Results:   {report.csv_path}")
    print(f"Error IDs: {report.error_ids_path}")
    return report


if __name__ == "__main__":
    load_env()
    setup_logging()
    run_sweep(
        run_file="benchmark/runs/mini_sweep.json",
        manifest="results/manifest.tsv",
    )
