import numpy as np
import pytest
from skimage import data as skimage_data

from texinr.imaging import Image, save_image
from texinr.network import InrModel, NetworkSpec


def smooth_image(width, height, seed=0):
    """Low-frequency RGB gradients; easy to overfit."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width]
    u, v = (x + 0.5) / width, (y + 0.5) / height
    phase = rng.uniform(0, 2 * np.pi, size=3)
    px = np.stack(
        [0.5 + 0.4 * np.sin(2 * np.pi * (u + v) / 2 + p) for p in phase],
        axis=-1,
    )
    return Image(px)


def photo_crop(size, x=200, y=110):
    """Square crop of a bundled photograph (skimage astronaut)."""
    rgb = skimage_data.astronaut()[y : y + size, x : x + size]
    return Image(rgb.astype(np.float64) / 255.0)


def checkerboard(size, periods):
    """`periods` black/white cells per side."""
    cell = size // periods
    y, x = np.mgrid[0:size, 0:size]
    board = ((x // cell + y // cell) % 2).astype(np.float64)
    return Image.from_array(board)


def constant_model(albedo, spec=None):
    """Zero weights everywhere; the output bias is the colour."""
    spec = spec or NetworkSpec(hidden_width=8, hidden_count=1)
    layers = [(np.zeros((d_in, d_out)), np.zeros(d_out)) for d_in, d_out in spec.layer_dims]
    W, _ = layers[-1]
    layers[-1] = (W, np.asarray(albedo, dtype=np.float64))
    return InrModel(spec, tuple(layers))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def texture_dir(tmp_path):
    """Four small PNGs with increasing detail."""
    d = tmp_path / "textures"
    d.mkdir()
    rng = np.random.default_rng(7)
    for i in range(4):
        base = smooth_image(16, 16, seed=i).pixels
        noise = rng.uniform(-1, 1, size=base.shape) * 0.1 * i
        save_image(Image(np.clip(base + noise, 0, 1)), d / f"tex_{i}.png")
    return d


@pytest.fixture
def texture_png(texture_dir):
    return texture_dir / "tex_0.png"
