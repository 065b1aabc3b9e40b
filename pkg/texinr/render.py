"""
Software ray tracer: a unit sphere textured by an INR under one directional light.

The camera sits on +z looking at the origin with +y up. Every primary ray that
hits the sphere samples the INR at the spherical (u, v) of the hit normal;
mipmap models pick the nearest discrete t from the screen-space footprint.
"""

import logging
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from texinr import store
from texinr.errors import ConfigError
from texinr.imaging import Image, lod_t, predict, save_image

log = logging.getLogger(__name__)

DEFAULT_LIGHT = (1.0, 1.0, 1.0)
DEFAULT_BACKGROUND = (0.0, 0.0, 0.0)
DEFAULT_TEXTURE_SIZE = 512


@dataclass(frozen=True)
class Camera:
    width: int = 256
    height: int = 256
    fov_deg: float = 40.0
    distance: float = 3.0

    def validate(self):
        if self.width < 1 or self.height < 1:
            raise ConfigError(f"camera resolution must be positive, got {self.width}x{self.height}")
        if not 0.0 < self.fov_deg < 180.0:
            raise ConfigError(f"field of view must lie in (0, 180) degrees, got {self.fov_deg}")
        if self.distance <= 1.0:
            raise ConfigError(f"camera must sit outside the unit sphere, got distance {self.distance}")
        return self


@dataclass
class RenderResult:
    image: Image
    mask: np.ndarray
    normals: np.ndarray
    lambert: np.ndarray
    uv: np.ndarray
    levels: np.ndarray = None
    path: Path = None


def _unit(v):
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0):
        raise ConfigError("direction vector must be non-zero")
    return v / n


def primary_rays(camera):
    """(origin, H x W x 3 unit directions) for a pinhole camera at (0, 0, distance)."""
    half = math.tan(math.radians(camera.fov_deg) / 2.0)
    aspect = camera.width / camera.height
    x = (2.0 * (np.arange(camera.width) + 0.5) / camera.width - 1.0) * half * aspect
    y = (1.0 - 2.0 * (np.arange(camera.height) + 0.5) / camera.height) * half
    xx, yy = np.meshgrid(x, y)
    dirs = np.stack([xx, yy, -np.ones_like(xx)], axis=-1)
    return np.array([0.0, 0.0, camera.distance]), _unit(dirs)


def intersect_unit_sphere(origin, dirs):
    """Nearest positive hit distance per ray; +inf on a miss."""
    b = dirs @ origin
    c = origin @ origin - 1.0
    disc = b * b - c
    hit = disc >= 0.0
    root = np.sqrt(np.where(hit, disc, 0.0))
    near = -b - root
    far = -b + root
    t = np.where(near > 0.0, near, far)
    return np.where(hit & (t > 0.0), t, np.inf)


def sphere_uv(normals):
    """u = 0.5 + atan2(n_z, n_x) / 2pi, v = 0.5 - asin(n_y) / pi."""
    nx, ny, nz = normals[..., 0], normals[..., 1], normals[..., 2]
    u = 0.5 + np.arctan2(nz, nx) / (2.0 * math.pi)
    v = 0.5 - np.arcsin(np.clip(ny, -1.0, 1.0)) / math.pi
    return np.stack([u, v], axis=-1)


def _diffs(uv, mask, axis):
    """|forward| and |backward| neighbour differences, NaN where a neighbour misses."""
    a = np.where(mask[..., None], uv, np.nan)
    d = np.diff(a, axis=axis)
    # u wraps around the seam
    d[..., 0] = d[..., 0] - np.round(d[..., 0])
    pad = [(0, 0)] * 3
    pad[axis] = (0, 1)
    fwd = np.pad(np.abs(d), pad, constant_values=np.nan)
    pad[axis] = (1, 0)
    bwd = np.pad(np.abs(d), pad, constant_values=np.nan)
    return fwd, bwd


def footprint_levels(uv, mask, levels, texture_size=(DEFAULT_TEXTURE_SIZE, DEFAULT_TEXTURE_SIZE)):
    """Nearest mip level: round(log2 of the texel footprint of one pixel), clamped to [0, levels-1]."""
    tex = np.asarray(texture_size, dtype=np.float64)
    footprint = np.full(mask.shape, np.nan)
    for axis in (0, 1):
        for d in _diffs(uv, mask, axis):
            texels = np.fmax(d[..., 0] * tex[0], d[..., 1] * tex[1])
            footprint = np.fmax(footprint, texels)
    footprint = np.nan_to_num(footprint, nan=1.0)
    level = np.round(np.log2(np.maximum(footprint, 1.0)))
    return np.clip(level, 0, levels - 1).astype(np.int64)


def model_texture_size(model, texture_size=None):
    if texture_size is not None:
        return tuple(texture_size)
    if all(model.base_size):
        return tuple(model.base_size)
    log.warning("model has no stored base size, assuming %dx%d", DEFAULT_TEXTURE_SIZE, DEFAULT_TEXTURE_SIZE)
    return (DEFAULT_TEXTURE_SIZE, DEFAULT_TEXTURE_SIZE)


def shade(albedo, normals, light_dir):
    """Lambert term max(0, n.l) times albedo; no ambient."""
    lambert = np.maximum(0.0, normals @ _unit(light_dir))
    return albedo * lambert[..., None], lambert


def render_sphere(
    model,
    camera=None,
    light_dir=DEFAULT_LIGHT,
    background=DEFAULT_BACKGROUND,
    texture_size=None,
    out_path=None,
):
    """Render `model` (an InrModel or a .tinr path) onto the unit sphere; writes a PNG if out_path.

    Mip levels are chosen against `texture_size`, which defaults to the base
    size stored with the model.
    """
    if isinstance(model, (str, Path)):
        model = store.load(model)
    camera = (camera or Camera()).validate()

    origin, dirs = primary_rays(camera)
    dist = intersect_unit_sphere(origin, dirs)
    mask = np.isfinite(dist)
    points = origin + dirs * np.where(mask, dist, 0.0)[..., None]
    normals = np.where(mask[..., None], _unit(np.where(mask[..., None], points, 1.0)), 0.0)
    uv = sphere_uv(normals)

    albedo = np.zeros(mask.shape + (3,))
    level_map = None
    if model.spec.input_dim == 3:
        levels = model.lod_levels or 1
        level_map = footprint_levels(uv, mask, levels, model_texture_size(model, texture_size))
        for level in np.unique(level_map[mask]):
            sel = mask & (level_map == level)
            coords = np.hstack([uv[sel], np.full((int(sel.sum()), 1), lod_t(int(level), levels))])
            albedo[sel] = predict(model, coords)
    else:
        albedo[mask] = predict(model, uv[mask])
    albedo = np.clip(albedo, 0.0, 1.0)

    lit, lambert = shade(albedo, normals, light_dir)
    lambert = np.where(mask, lambert, 0.0)
    bg = np.clip(np.asarray(background, dtype=np.float64), 0.0, 1.0)
    pixels = np.where(mask[..., None], lit, bg)
    result = RenderResult(Image(pixels), mask, normals, lambert, uv, level_map)

    if out_path is not None:
        out_path = Path(out_path)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        result.path = save_image(result.image, out_path)
        log.info("[OK] rendered %dx%d sphere -> %s", camera.width, camera.height, out_path)
    return result
