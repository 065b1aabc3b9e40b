import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from texinr.corpus import (
    CorpusEntry,
    CorpusIndex,
    index_corpus,
    lapv_histogram,
    read_manifest,
    regular_ranks,
    select_entries,
    select_regular,
    write_manifest,
)
from texinr.errors import CorpusError
from texinr.imaging import Image, load_image, save_image
from texinr.metrics import lapv


def _index(values):
    return CorpusIndex(tuple(CorpusEntry(f"img_{i:03d}.png", v) for i, v in enumerate(values)))


class TestIndex:
    def test_constant_images_sort_by_path(self, tmp_path):
        for name in ("c.png", "a.png", "b.png"):
            save_image(Image(np.full((8, 8, 3), 0.5)), tmp_path / name)
        index = index_corpus(tmp_path, workers=2)
        assert [e.lapv for e in index.entries] == [0.0, 0.0, 0.0]
        assert [p.rsplit("/", 1)[-1] for p in index.paths] == ["a.png", "b.png", "c.png"]

    def test_ordering_matches_lapv(self, texture_dir):
        index = index_corpus(texture_dir)
        expected = sorted(texture_dir.glob("*.png"), key=lambda p: lapv(load_image(p)))
        assert index.paths == [str(p) for p in expected]
        assert all(a.lapv <= b.lapv for a, b in zip(index.entries, index.entries[1:]))

    def test_single_image(self, tmp_path):
        save_image(Image(np.zeros((4, 4, 3))), tmp_path / "only.png")
        assert len(index_corpus(tmp_path)) == 1

    def test_unreadable_skipped(self, texture_dir):
        (texture_dir / "broken.png").write_bytes(b"\x89PNG garbage")
        (texture_dir / "notes.txt").write_text("ignored")
        index = index_corpus(texture_dir)
        assert len(index) == 4
        assert not any("broken" in p for p in index.paths)

    def test_empty(self, tmp_path):
        with pytest.raises(CorpusError):
            index_corpus(tmp_path)

    def test_nothing_readable(self, tmp_path):
        (tmp_path / "x.png").write_bytes(b"nope")
        with pytest.raises(CorpusError):
            index_corpus(tmp_path)


class TestSelection:
    def test_reference_ranks(self):
        ranks = regular_ranks(5640, 25)
        assert ranks[:2] == [112, 338]
        assert len(ranks) == 25

    def test_all(self):
        index = _index([1.0, 2.0, 3.0, 4.0])
        assert select_regular(index, 4) == index.paths

    def test_median(self):
        index = _index([float(i) for i in range(7)])
        assert select_regular(index, 1) == ["img_003.png"]

    def test_too_many(self):
        with pytest.raises(CorpusError):
            select_regular(_index([1.0, 2.0]), 3)
        with pytest.raises(CorpusError):
            select_regular(_index([1.0, 2.0]), 0)

    @given(size=st.integers(1, 500), data=st.data())
    def test_rank_properties(self, size, data):
        n = data.draw(st.integers(1, size))
        ranks = regular_ranks(size, n)
        assert len(ranks) == n == len(set(ranks))
        assert all(0 <= r < size for r in ranks)
        assert ranks == sorted(ranks)

    def test_selected_lapv_non_decreasing(self):
        index = _index(sorted(np.random.default_rng(0).uniform(0, 100, size=40)))
        picks = select_entries(index, 9)
        assert all(a.lapv <= b.lapv for a, b in zip(picks, picks[1:]))
        assert select_entries(index, 9) == picks


class TestManifest:
    def test_round_trip(self, tmp_path):
        entries = [CorpusEntry("a/b.png", 12.5), CorpusEntry("c d.jpg", 1e-300)]
        path = write_manifest(entries, tmp_path / "out" / "manifest.tsv")
        assert path.read_text().splitlines()[0] == "a/b.png\t12.5"
        assert read_manifest(path) == entries

    def test_paths_only(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("x.png\n\ny.png\t3.0\n")
        entries = read_manifest(path)
        assert entries[0].path == "x.png" and math.isnan(entries[0].lapv)
        assert entries[1] == CorpusEntry("y.png", 3.0)

    def test_empty_manifest(self, tmp_path):
        path = tmp_path / "m.tsv"
        path.write_text("\n")
        with pytest.raises(CorpusError):
            read_manifest(path)


def test_histogram_cdf():
    counts, edges, cdf = lapv_histogram(_index([0.0, 1.0, 1.0, 2.0, 10.0]), bins=5)
    assert counts.sum() == 5 and len(edges) == 6
    assert cdf[-1] == pytest.approx(1.0)
    assert np.all(np.diff(cdf) >= 0)
