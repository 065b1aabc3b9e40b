"""
Diversity sampling of a texture corpus by Laplacian variance (LAPV).
------------------------------------------------------------------

Every readable image gets a LAPV score; the index is sorted ascending and
N images are picked at regular rank (quantile) intervals of the empirical CDF.
"""

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from tqdm import tqdm

from texinr.errors import CorpusError, ImageError, ShapeError
from texinr.imaging import load_image
from texinr.metrics import lapv

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg"}


@dataclass(frozen=True)
class CorpusEntry:
    path: str
    lapv: float


@dataclass(frozen=True)
class CorpusIndex:
    entries: tuple

    def __len__(self):
        return len(self.entries)

    @property
    def paths(self):
        return [e.path for e in self.entries]


def _score(path):
    try:
        return CorpusEntry(str(path), lapv(load_image(path)))
    except (ImageError, ShapeError) as e:
        return e


def index_corpus(directory, workers=None):
    """Score every image under `directory` (recursively); unreadable files are skipped."""
    directory = Path(directory)
    files = sorted(
        p for p in directory.rglob("*") if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES
    )
    if not files:
        raise CorpusError(f"no images found under {directory}")

    workers = workers or int(os.environ.get("TEXINR_WORKERS", 0)) or None
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(tqdm(pool.map(_score, files), total=len(files), desc="LAPV"))

    entries = []
    for path, res in zip(files, results):
        if isinstance(res, Exception):
            log.warning("[SKIP] %s: %s", path, res)
            continue
        entries.append(res)

    if not entries:
        raise CorpusError(f"none of the {len(files)} files under {directory} could be read")

    entries.sort(key=lambda e: (e.lapv, e.path))
    log.info("[OK] indexed %d of %d images", len(entries), len(files))
    return CorpusIndex(tuple(entries))


def regular_ranks(size, n):
    """floor((k + 0.5) * size / n) for k = 0..n-1, collisions moved to the next free rank."""
    if not 1 <= n <= size:
        raise CorpusError(f"cannot select {n} images from a corpus of {size}")

    used = set()
    ranks = []
    for k in range(n):
        r = min(math.floor((k + 0.5) * size / n), size - 1)
        while r in used:
            r += 1
        if r >= size:
            r = max(i for i in range(size) if i not in used)
        used.add(r)
        ranks.append(r)
    return sorted(ranks)


def select_regular(index, n):
    return [index.entries[r].path for r in regular_ranks(len(index), n)]


def select_entries(index, n):
    return [index.entries[r] for r in regular_ranks(len(index), n)]


def lapv_histogram(index, bins=50):
    """Histogram counts, bin edges and the empirical CDF at each right edge."""
    values = np.array([e.lapv for e in index.entries])
    counts, edges = np.histogram(values, bins=bins)
    cdf = np.cumsum(counts) / counts.sum()
    return counts, edges, cdf


# ============================================================
# Manifest
# ============================================================
def write_manifest(entries, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for e in entries:
            f.write(f"{e.path}\t{e.lapv!r}\n")
    return path


def read_manifest(path):
    entries = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            parts = line.split("\t")
            score = float(parts[1]) if len(parts) > 1 and parts[1] else math.nan
            entries.append(CorpusEntry(parts[0], score))
    if not entries:
        raise CorpusError(f"manifest {path} lists no images")
    return entries
