"""
Image quality and complexity metrics.

Pixel metrics work on the 0-255 scale with MAX = 255, so that
PSNR = 10 log10(255^2 / MSE).
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from texinr.errors import ConfigError, ShapeError

MAX_VALUE = 255.0
BITS_PER_PARAM = 32

LUMA = np.array([0.299, 0.587, 0.114])

GLOBAL = "global"
LOCAL = "local"


@dataclass(frozen=True)
class SsimConfig:
    c1: float = (0.01 * MAX_VALUE) ** 2
    c2: float = (0.03 * MAX_VALUE) ** 2
    c3: float = (0.03 * MAX_VALUE) ** 2 / 2
    alpha: float = 1.0
    beta: float = 1.0
    gamma: float = 1.0
    window: str = GLOBAL
    window_size: int = 11
    sigma: float = 1.5

    def validate(self):
        if min(self.c1, self.c2, self.c3, self.alpha, self.beta, self.gamma) <= 0:
            raise ConfigError(f"SSIM constants and exponents must be positive: {self}")
        if self.window not in (GLOBAL, LOCAL):
            raise ConfigError(f"unknown SSIM window mode {self.window!r}")
        return self


@dataclass
class EvalRecord:
    """One evaluated model; field order is the report CSV column order."""

    image: str
    arch: str
    width: int
    depth: int
    optimizer: str
    lr: float
    epochs: int
    params: int
    bpp: float
    bucket: int
    mae: float
    mse: float
    psnr: float
    ssim: float
    seconds: float = None
    model_id: str = ""

    @property
    def psnr_infinite(self):
        return math.isinf(self.psnr)


def _check_pair(a, b):
    if a.shape != b.shape:
        raise ShapeError(f"image shapes differ: {a.shape} vs {b.shape}")


def _pixels255(img):
    return np.asarray(img.pixels, dtype=np.float64) * MAX_VALUE


def luma255(img):
    """Y channel on the 0-255 scale."""
    return _pixels255(img) @ LUMA


# ============================================================
# Pixel errors
# ============================================================
def mae(a, b):
    _check_pair(a, b)
    return float(np.mean(np.abs(_pixels255(a) - _pixels255(b))))


def mse(a, b):
    _check_pair(a, b)
    return float(np.mean(np.square(_pixels255(a) - _pixels255(b))))


def psnr(mse_255):
    """10 log10(255^2 / mse); identical images give +inf."""
    if mse_255 < 0:
        raise ValueError(f"MSE must be non-negative, got {mse_255}")
    if mse_255 == 0:
        return math.inf
    return 10.0 * math.log10(MAX_VALUE**2 / mse_255)


def psnr_from_images(a, b):
    return psnr(mse(a, b))


# ============================================================
# SSIM
# ============================================================
def _signed_pow(x, p):
    return np.sign(x) * np.abs(x) ** p if p != 1.0 else x


def _ssim_terms(mu_a, mu_b, var_a, var_b, cov, cfg):
    sd_a = np.sqrt(np.maximum(var_a, 0.0))
    sd_b = np.sqrt(np.maximum(var_b, 0.0))
    l = (2 * mu_a * mu_b + cfg.c1) / (mu_a**2 + mu_b**2 + cfg.c1)
    c = (2 * sd_a * sd_b + cfg.c2) / (var_a + var_b + cfg.c2)
    s = (cov + cfg.c3) / (sd_a * sd_b + cfg.c3)
    return _signed_pow(l, cfg.alpha) * _signed_pow(c, cfg.beta) * _signed_pow(s, cfg.gamma)


def ssim(a, b, cfg=None):
    """Luminance * contrast * structure on the Y channel.

    Global mode uses whole-image statistics; local mode averages the SSIM map
    of a Gaussian window over the region the window fully covers.
    """
    cfg = (cfg or SsimConfig()).validate()
    _check_pair(a, b)
    ya, yb = luma255(a), luma255(b)

    if np.array_equal(ya, yb):
        return 1.0

    if cfg.window == GLOBAL:
        mu_a, mu_b = ya.mean(), yb.mean()
        var_a, var_b = ya.var(), yb.var()
        cov = np.mean((ya - mu_a) * (yb - mu_b))
        return float(_ssim_terms(mu_a, mu_b, var_a, var_b, cov, cfg))

    size = cfg.window_size
    if min(ya.shape) < size:
        raise ShapeError(f"local SSIM needs at least {size}x{size} pixels, got {ya.shape}")
    radius = size // 2
    blur = lambda x: gaussian_filter(x, cfg.sigma, truncate=radius / cfg.sigma)
    mu_a, mu_b = blur(ya), blur(yb)
    var_a = blur(ya * ya) - mu_a**2
    var_b = blur(yb * yb) - mu_b**2
    cov = blur(ya * yb) - mu_a * mu_b
    smap = _ssim_terms(mu_a, mu_b, var_a, var_b, cov, cfg)
    return float(smap[radius:-radius, radius:-radius].mean())


# ============================================================
# Complexity and rate
# ============================================================
def lapv(img):
    """Variance of the 4-neighbour Laplacian of the 0-255 luma, interior pixels only."""
    if img.width < 3 or img.height < 3:
        raise ShapeError(f"LAPV needs at least 3x3 pixels, got {img.width}x{img.height}")
    y = luma255(img)
    # pairwise sums keep a constant image at exactly zero
    vertical = y[:-2, 1:-1] + y[2:, 1:-1]
    horizontal = y[1:-1, :-2] + y[1:-1, 2:]
    lap = (vertical + horizontal) - 4.0 * y[1:-1, 1:-1]
    return float(np.var(lap))


def bits_per_pixel(param_count, width, height):
    if width * height <= 0:
        raise ShapeError(f"image area must be positive, got {width}x{height}")
    return param_count * BITS_PER_PARAM / (width * height)


def bucket_bpp(bpp):
    """Nearest even integer, ties rounded away from zero."""
    half = abs(bpp) / 2.0
    return int(math.copysign(2 * math.floor(half + 0.5), bpp))
