import dataclasses
import math

import numpy as np
import pytest

from texinr import store
from texinr.errors import ConfigError
from texinr.network import arch_spec
from texinr.render import (
    DEFAULT_TEXTURE_SIZE,
    Camera,
    footprint_levels,
    intersect_unit_sphere,
    primary_rays,
    render_sphere,
    shade,
    sphere_uv,
)

from conftest import constant_model

ALBEDO = (0.8, 0.4, 0.2)


def _lambert(normals, light):
    light = np.asarray(light, dtype=np.float64)
    return np.maximum(0.0, normals @ (light / np.linalg.norm(light)))


class TestGeometry:
    def test_centre_ray_hits_at_distance_two(self):
        camera = Camera(width=33, height=33)
        origin, dirs = primary_rays(camera)
        np.testing.assert_allclose(dirs[16, 16], [0.0, 0.0, -1.0], atol=1e-15)
        dist = intersect_unit_sphere(origin, dirs)
        assert dist[16, 16] == pytest.approx(2.0, abs=1e-12)

    def test_corners_miss(self):
        origin, dirs = primary_rays(Camera(width=32, height=32))
        dist = intersect_unit_sphere(origin, dirs)
        assert all(math.isinf(dist[i, j]) for i, j in [(0, 0), (0, -1), (-1, 0), (-1, -1)])

    def test_rays_are_unit_length(self):
        _, dirs = primary_rays(Camera(width=20, height=10))
        np.testing.assert_allclose(np.linalg.norm(dirs, axis=-1), 1.0, rtol=1e-12)

    @pytest.mark.parametrize(
        "normal, uv",
        [
            ((0.0, 0.0, 1.0), (0.75, 0.5)),
            ((1.0, 0.0, 0.0), (0.5, 0.5)),
            ((0.0, 0.0, -1.0), (0.25, 0.5)),
            ((0.0, 1.0, 0.0), (0.5, 0.0)),
            ((0.0, -1.0, 0.0), (0.5, 1.0)),
        ],
    )
    def test_sphere_uv(self, normal, uv):
        np.testing.assert_allclose(sphere_uv(np.array([normal]))[0], uv, atol=1e-15)


class TestShading:
    def test_lambert_clamps_back_faces(self):
        normals = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]])
        lit, lambert = shade(np.ones((2, 3)), normals, (0.0, 0.0, 2.0))
        np.testing.assert_array_equal(lambert, [1.0, 0.0])
        np.testing.assert_array_equal(lit[1], [0.0, 0.0, 0.0])

    def test_zero_light_rejected(self):
        with pytest.raises(ConfigError):
            shade(np.ones((1, 3)), np.array([[0.0, 0.0, 1.0]]), (0.0, 0.0, 0.0))


class TestRenderSphere:
    def test_constant_texture_is_albedo_times_lambert(self):
        light = (1.0, 2.0, 3.0)
        result = render_sphere(constant_model(ALBEDO), Camera(width=24, height=24), light_dir=light)
        mask = result.mask
        assert mask.any() and not mask.all()
        expected = np.asarray(ALBEDO) * _lambert(result.normals, light)[..., None]
        np.testing.assert_array_equal(result.image.pixels[mask], expected[mask])

    def test_background_is_exact(self):
        result = render_sphere(constant_model(ALBEDO), Camera(width=16, height=16), background=(0.1, 0.2, 0.3))
        np.testing.assert_array_equal(result.image.pixels[~result.mask], np.tile([0.1, 0.2, 0.3], ((~result.mask).sum(), 1)))

    def test_centre_pixel_faces_camera(self):
        result = render_sphere(constant_model(ALBEDO), Camera(width=33, height=33), light_dir=(0.0, 0.0, 1.0))
        np.testing.assert_allclose(result.normals[16, 16], [0.0, 0.0, 1.0], atol=1e-12)
        np.testing.assert_allclose(result.image.pixels[16, 16], ALBEDO, rtol=1e-12)

    def test_png_is_deterministic(self, tmp_path):
        model = store.load(store.save(constant_model(ALBEDO), tmp_path / "c.tinr"))
        a = render_sphere(model, Camera(width=20, height=16), out_path=tmp_path / "a.png")
        b = render_sphere(tmp_path / "c.tinr", Camera(width=20, height=16), out_path=tmp_path / "b.png")
        assert a.path.read_bytes() == b.path.read_bytes()

    def test_mipmap_levels_are_clamped(self):
        model = dataclasses.replace(constant_model(ALBEDO, arch_spec("mlp", 8, 1, mipmap=True)), lod_levels=4)
        tiny = render_sphere(model, Camera(width=16, height=16), texture_size=(1, 1))
        assert (tiny.levels[tiny.mask] == 0).all()

        big = render_sphere(model, Camera(width=16, height=16), texture_size=(4096, 4096))
        assert big.levels.min() >= 0 and big.levels.max() <= 3
        assert big.levels[big.mask].max() > 0
        np.testing.assert_allclose(big.image.pixels[big.mask], tiny.image.pixels[tiny.mask], rtol=1e-12)

    def test_stored_base_size_picks_levels(self, tmp_path):
        model = constant_model(ALBEDO, arch_spec("mlp", 8, 1, mipmap=True))
        big = dataclasses.replace(model, lod_levels=4, base_size=(4096, 4096))
        camera = Camera(width=16, height=16)
        stored = render_sphere(store.load(store.save(big, tmp_path / "big.tinr")), camera)
        explicit = render_sphere(big, camera, texture_size=(4096, 4096))
        np.testing.assert_array_equal(stored.levels, explicit.levels)
        assert stored.levels[stored.mask].max() > 0

        tiny = render_sphere(dataclasses.replace(big, base_size=(1, 1)), camera)
        assert (tiny.levels[tiny.mask] == 0).all()

    def test_unknown_base_size_uses_default(self):
        model = dataclasses.replace(constant_model(ALBEDO, arch_spec("mlp", 8, 1, mipmap=True)), lod_levels=4)
        camera = Camera(width=16, height=16)
        np.testing.assert_array_equal(
            render_sphere(model, camera).levels,
            render_sphere(model, camera, texture_size=(DEFAULT_TEXTURE_SIZE, DEFAULT_TEXTURE_SIZE)).levels,
        )

    def test_footprint_handles_single_hit(self):
        uv = np.full((3, 3, 2), 0.5)
        mask = np.zeros((3, 3), dtype=bool)
        mask[1, 1] = True
        assert footprint_levels(uv, mask, 6, (512, 512))[1, 1] == 0


class TestCamera:
    @pytest.mark.parametrize(
        "kwargs", [{"width": 0}, {"fov_deg": 0.0}, {"fov_deg": 180.0}, {"distance": 1.0}]
    )
    def test_invalid(self, kwargs):
        with pytest.raises(ConfigError):
            Camera(**kwargs).validate()
