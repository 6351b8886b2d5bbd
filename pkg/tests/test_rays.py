import numpy as np
import pytest

from lightray.errors import ChartError, RayError
from lightray.rays import (LightRay, NullDirection, RayChart, ray_coords, ray_from_coords,
                           ray_from_event_direction, ray_through, sky_sample, sphere_points)


def test_backtrack_to_cauchy_surface(mink3):
    ray = ray_from_event_direction(mink3, [0.5, 0.0, 0.0], [1.0, 1.0, 0.0])
    assert np.allclose(ray.anchor, [0.0, -0.5, 0.0], atol=1e-10)
    assert np.allclose(ray.direction, [1.0, 0.0], atol=1e-12)
    assert abs(ray.mark - 0.5) < 1e-10


def test_event_on_surface_is_identity(mink3):
    ray, t_p = ray_through(mink3, [0.0, 0.3, -0.2], [1.0, 0.6, 0.8])
    assert t_p == 0.0
    assert np.allclose(ray.anchor, [0.0, 0.3, -0.2])
    assert np.allclose(ray.direction, [0.6, 0.8])


@pytest.mark.parametrize("lam", [0.1, 10.0])
def test_scale_invariance(geps, lam):
    p, xi = np.array([0.4, 0.2, 0.1]), np.array([1.0, 0.6, 0.8])
    xi = geps.frame(p) @ xi
    a = ray_from_event_direction(geps, p, xi)
    b = ray_from_event_direction(geps, p, lam * xi)
    assert a.same_as(b, tol=1e-9)


def test_non_null_direction_rejected(mink3):
    with pytest.raises(RayError):
        ray_from_event_direction(mink3, [0.0, 0.0, 0.0], [1.0, 0.5, 0.0])
    with pytest.raises(RayError):
        ray_from_event_direction(mink3, [0.0, 0.0, 0.0], [-1.0, 1.0, 0.0])


def test_canonicalization_idempotent(geps):
    ray = ray_from_event_direction(geps, [0.6, 0.0, 0.0], geps.frame([0.6, 0, 0]) @ [1.0, 0.0, 1.0])
    for t in (-1.0, 0.5, 2.0):
        x, v = ray.state(t)
        again = ray_from_event_direction(geps, x, v)
        assert again.same_as(ray, tol=1e-8)
        assert abs(np.linalg.norm(again.direction) - 1.0) < 1e-14


def test_angle_chart_through_origin(mink3):
    chart = RayChart(mink3, kind="angle")
    for th in (0.3, 2.0, -2.5):
        ray = ray_from_event_direction(mink3, [0, 0, 0], [1.0, np.cos(th), np.sin(th)])
        x, u = ray_coords(chart, ray)
        assert np.allclose(x, 0.0, atol=1e-12) and abs(u[0] - th) < 1e-12


def test_chart_round_trip(mink4, rng):
    chart = RayChart(mink4)
    for _ in range(100):
        x = rng.uniform(-3, 3, 3)
        u = rng.uniform(-0.5, 0.5, 2)
        ray = ray_from_coords(chart, x, u)
        x2, u2 = ray_coords(chart, ray)
        assert np.max(np.abs(np.concatenate([x - x2, u - u2]))) < 1e-9


def test_hemisphere_boundary(mink3):
    ray = ray_from_event_direction(mink3, [0, 0, 0], [1.0, -1.0, 0.0])
    with pytest.raises(ChartError):
        ray_coords(RayChart(mink3), ray)
    assert abs(abs(ray_coords(RayChart(mink3, kind="angle"), ray)[1][0]) - np.pi) < 1e-12


def test_angle_chart_needs_dim3(mink4):
    with pytest.raises(ChartError):
        RayChart(mink4, kind="angle")


def test_chart_injective(mink3, rng):
    chart = RayChart(mink3, kind="angle")
    coords = [np.concatenate([rng.uniform(-1, 1, 2), rng.uniform(-3, 3, 1)]) for _ in range(30)]
    rays = [ray_from_coords(chart, c[:2], c[2:]) for c in coords]
    for i in range(len(rays)):
        for j in range(i):
            a = np.concatenate(ray_coords(chart, rays[i]))
            b = np.concatenate(ray_coords(chart, rays[j]))
            assert np.max(np.abs(a - b)) > 1e-6


def test_sky_sample_minkowski(mink3):
    rays = sky_sample(mink3, [0.0, 0.0, 0.0], 8)
    assert len(rays) == 8
    for k, ray in enumerate(rays):
        th = 2 * np.pi * k / 8
        assert np.allclose(ray.direction, [np.cos(th), np.sin(th)], atol=1e-12)
        for s in (0.5, 2.0):
            assert np.allclose(ray.point(s), [s, s * np.cos(th), s * np.sin(th)], atol=1e-9)


def test_sky_sample_passes_through_event(geps, einstein):
    for metric, p in ((geps, [0.4, 0.1, 0.0]), (einstein, [0.5, 1.3, 0.2])):
        for ray in sky_sample(metric, p, 6):
            assert np.max(np.abs(ray.point(ray.mark) - p)) < 1e-7


def test_sky_sample_threads_identical(geps):
    a = sky_sample(geps, [0.4, 0.1, 0.0], 6)
    b = sky_sample(geps, [0.4, 0.1, 0.0], 6, threads=3)
    for r1, r2 in zip(a, b):
        assert np.array_equal(r1.anchor, r2.anchor) and np.array_equal(r1.direction, r2.direction)


def test_shared_ray_of_two_skies(mink3):
    q = np.array([1.0, 1.0, 0.0])
    rays = sky_sample(mink3, [0, 0, 0], 16)
    hits = [r for r in rays if np.linalg.norm(r.point(1.0) - q) < 1e-9]
    assert len(hits) == 1 and np.allclose(hits[0].direction, [1.0, 0.0])


def test_sphere_points_unit(rng):
    for m, n in ((3, 7), (4, 50), (5, 20)):
        pts = sphere_points(m, n)
        assert pts.shape == (n, m - 1)
        assert np.allclose(np.linalg.norm(pts, axis=1), 1.0)


def test_null_direction_validates():
    with pytest.raises(ValueError):
        NullDirection(np.zeros(3), np.array([1.0, 1.0]))
    d = NullDirection(np.zeros(3), np.array([0.6, 0.8]))
    assert isinstance(d.unit, np.ndarray)


def test_lightray_velocity_null(geps):
    ray = LightRay(geps, np.array([0.0, 0.0, 0.0]), np.array([0.6, 0.8]))
    for t in (0.0, 1.0, 3.0):
        x, v = ray.state(t)
        assert abs(geps.inner(x, v, v)) < 1e-9
