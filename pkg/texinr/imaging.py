"""
Image I/O, mipmap pyramids and (u, v[, t]) -> RGB training sets.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from PIL import Image as PILImage
from PIL import UnidentifiedImageError
from skimage.transform import resize

from texinr.errors import ConfigError, ImageError, ShapeError
from texinr.network import forward

DEFAULT_LEVELS = 6
ATLAS_GUTTER = 2
DECODE_CHUNK = 16384


@dataclass(frozen=True)
class Image:
    """H x W x 3 float64 pixels in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3:
            raise ShapeError(f"image pixels must be H x W x 3, got {p.shape}")
        if p.size and (p.min() < 0.0 or p.max() > 1.0):
            raise ImageError("image pixels must lie in [0, 1]")

    @classmethod
    def from_array(cls, array):
        a = np.asarray(array, dtype=np.float64)
        if a.ndim == 2:
            a = np.repeat(a[:, :, None], 3, axis=2)
        return cls(np.clip(a, 0.0, 1.0))

    @property
    def width(self):
        return self.pixels.shape[1]

    @property
    def height(self):
        return self.pixels.shape[0]

    @property
    def shape(self):
        return self.pixels.shape


@dataclass(frozen=True)
class MipmapPyramid:
    levels: tuple

    @property
    def level_count(self):
        return len(self.levels)

    @property
    def base(self):
        return self.levels[0]


class TrainingSample(NamedTuple):
    u: float
    v: float
    t: float
    rgb: tuple


@dataclass(frozen=True)
class TrainingSet:
    """Flat overfit dataset: coords (N x 2 or N x 3) paired with rgb (N x 3)."""

    coords: np.ndarray
    rgb: np.ndarray

    def __len__(self):
        return self.coords.shape[0]

    def __iter__(self):
        has_t = self.coords.shape[1] == 3
        for c, rgb in zip(self.coords, self.rgb):
            yield TrainingSample(c[0], c[1], c[2] if has_t else None, tuple(rgb))

    @property
    def input_dim(self):
        return self.coords.shape[1]


# ============================================================
# I/O
# ============================================================
def load_image(path):
    """Read an 8-bit PNG/JPEG; grayscale is replicated to RGB and alpha dropped."""
    try:
        with PILImage.open(path) as im:
            rgb = np.asarray(im.convert("RGB"), dtype=np.float64)
    except (FileNotFoundError, UnidentifiedImageError, OSError) as e:
        raise ImageError(f"cannot read image {path}: {e}") from e
    return Image(rgb / 255.0)


def to_uint8(img):
    return np.round(np.clip(img.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)


def save_image(img, path):
    PILImage.fromarray(to_uint8(img)).save(path)
    return path


def crop(img, width, height, x=0, y=0):
    return Image(img.pixels[y : y + height, x : x + width].copy())


# ============================================================
# Mipmaps
# ============================================================
def level_size(width, height, level):
    return math.ceil(width / 2**level), math.ceil(height / 2**level)


def build_pyramid(base, levels=DEFAULT_LEVELS):
    """Each level is resampled from the base image with order-1 (bilinear) splines."""
    if levels < 1:
        raise ConfigError(f"a pyramid needs at least one level, got {levels}")
    need = 2 ** (levels - 1)
    if base.width < need or base.height < need:
        raise ShapeError(
            f"{base.width}x{base.height} image is too small for {levels} mip levels (need {need}px)"
        )

    out = [base]
    for level in range(1, levels):
        w, h = level_size(base.width, base.height, level)
        px = resize(base.pixels, (h, w, 3), order=1, anti_aliasing=True)
        out.append(Image(np.clip(px, 0.0, 1.0)))
    return MipmapPyramid(tuple(out))


def lod_t(level, levels):
    return level / (levels - 1) if levels > 1 else 0.0


def pixel_centers(width, height):
    """Row-major (u, v) pixel-center grid: u = (x + 0.5) / W, v = (y + 0.5) / H."""
    u = (np.arange(width) + 0.5) / width
    v = (np.arange(height) + 0.5) / height
    uu, vv = np.meshgrid(u, v)
    return np.stack([uu.ravel(), vv.ravel()], axis=1)


def build_dataset(img):
    coords = pixel_centers(img.width, img.height)
    return TrainingSet(coords, img.pixels.reshape(-1, 3).copy())


def build_mipmap_dataset(pyramid):
    """Level-major, row-major samples; every pixel of every level weighs the same."""
    coords, rgb = [], []
    n = pyramid.level_count
    for level, img in enumerate(pyramid.levels):
        uv = pixel_centers(img.width, img.height)
        t = np.full((uv.shape[0], 1), lod_t(level, n))
        coords.append(np.hstack([uv, t]))
        rgb.append(img.pixels.reshape(-1, 3))
    return TrainingSet(np.vstack(coords), np.vstack(rgb))


# ============================================================
# Decoding
# ============================================================
def predict(model, coords):
    """Chunked forward pass; raw (unclamped) RGB."""
    out = np.empty((coords.shape[0], 3))
    for start in range(0, coords.shape[0], DECODE_CHUNK):
        stop = start + DECODE_CHUNK
        out[start:stop] = forward(model, coords[start:stop])
    return out


def decode_image(model, width, height, t=None):
    """Evaluate the model on the pixel-center grid and clamp to [0, 1]."""
    if (model.spec.input_dim == 3) != (t is not None):
        raise ShapeError(
            f"model with input_dim={model.spec.input_dim} cannot be decoded with t={t}"
        )
    coords = pixel_centers(width, height)
    if t is not None:
        coords = np.hstack([coords, np.full((coords.shape[0], 1), float(t))])
    rgb = predict(model, coords)
    return Image(np.clip(rgb, 0.0, 1.0).reshape(height, width, 3))


def decode_pyramid(model, width, height, levels=DEFAULT_LEVELS):
    if model.spec.input_dim != 3:
        raise ShapeError("only (u, v, t) models decode to a mipmap pyramid")
    out = []
    for level in range(levels):
        w, h = level_size(width, height, level)
        out.append(decode_image(model, w, h, t=lod_t(level, levels)))
    return MipmapPyramid(tuple(out))


def pack_atlas(pyramid, gutter=ATLAS_GUTTER):
    """Levels left to right, top-aligned, separated by a black gutter."""
    levels = pyramid.levels
    width = sum(img.width for img in levels) + gutter * (len(levels) - 1)
    atlas = np.zeros((levels[0].height, width, 3))
    x = 0
    for img in levels:
        atlas[: img.height, x : x + img.width] = img.pixels
        x += img.width + gutter
    return Image(atlas)


def residual_image(decoded, reference):
    """Per-channel |decoded - reference|, stretched so the largest error is white."""
    if decoded.shape != reference.shape:
        raise ShapeError(f"residual needs equal shapes, got {decoded.shape} vs {reference.shape}")
    diff = np.abs(decoded.pixels - reference.pixels)
    peak = diff.max() if diff.size else 0.0
    if peak > 0.0:
        diff = diff / peak
    return Image(np.clip(diff, 0.0, 1.0))
