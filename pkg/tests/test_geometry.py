import numpy as np
import pytest

from lightray.catalog import make_perturbed_minkowski
from lightray.errors import DimensionError
from lightray.geometry import (CausalCharacter, CurveSample, MetricSpec, TangentVector,
                               causal_character, christoffel, cotton_tensor, geodesic_flow,
                               lowered_riemann, parallel_transport, ricci, riemann,
                               scalar_curvature, validate_metric)

P_HALF = np.array([0.25, 0.1, -0.3])


def fd_christoffel(metric, p, h=1e-5):
    m = metric.dim
    dg = np.zeros((m, m, m))
    for k in range(m):
        e = np.zeros(m)
        e[k] = h
        dg[k] = (metric.g(p + e) - metric.g(p - e)) / (2 * h)
    ginv = np.linalg.inv(metric.g(p))
    low = 0.5 * (np.einsum("jil->lij", dg) + np.einsum("ijl->lij", dg) - dg)
    return np.einsum("kl,lij->kij", ginv, low)


def test_christoffel_minkowski_zero(mink3):
    assert np.all(christoffel(mink3, np.array([0.3, -1.0, 2.0])) == 0)


def test_christoffel_geps_vanishes_before_bump(geps):
    assert np.max(np.abs(christoffel(geps, np.array([-0.4, 1.0, 2.0])))) == 0


def test_christoffel_geps_matches_fd(geps):
    exact = christoffel(geps, P_HALF)
    approx = fd_christoffel(geps, P_HALF)
    assert np.max(np.abs(exact - approx)) < 1e-6 * np.max(np.abs(exact))


def test_riemann_minkowski_zero(mink3):
    assert np.max(np.abs(riemann(mink3, np.zeros(3)))) == 0


def test_riemann_geps_matches_fd_of_christoffel(geps):
    h = 1e-5
    p = P_HALF
    dgam = np.zeros((3, 3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dgam[k] = (christoffel(geps, p + e) - christoffel(geps, p - e)) / (2 * h)
    gam = christoffel(geps, p)
    # R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_ce G^e_db - G^a_de G^e_cb
    ref = (np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
           + np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam))
    R = riemann(geps, p)
    assert np.max(np.abs(R)) > 1e-3
    assert np.max(np.abs(R - ref)) < 1e-4 * np.max(np.abs(R))


def test_lowered_riemann_symmetries(geps, rng):
    for _ in range(100):
        p = np.array([rng.uniform(0.05, 2.0), *rng.uniform(-3, 3, 2)])
        R = lowered_riemann(geps, p)
        scale = max(1.0, np.max(np.abs(R)))
        assert np.max(np.abs(R + np.swapaxes(R, 2, 3))) < 1e-10 * scale
        assert np.max(np.abs(R + np.swapaxes(R, 0, 1))) < 1e-10 * scale
        assert np.max(np.abs(R - np.transpose(R, (2, 3, 0, 1)))) < 1e-8 * scale


def test_einstein_static_scalar_curvature(einstein):
    p = np.array([0.0, 1.2, 0.4])
    assert abs(scalar_curvature(einstein, p) - 2.0) < 1e-10
    assert np.max(np.abs(riemann(einstein, p))) > 0.1
    assert np.allclose(ricci(einstein, p), np.diag([0.0, 1.0, np.sin(1.2) ** 2]), atol=1e-10)


def test_frame_orthonormal(mink3, geps, einstein, rng):
    for metric, lo in ((mink3, -2), (geps, -2), (einstein, 0.3)):
        for _ in range(20):
            p = np.array([rng.uniform(-2, 2), rng.uniform(lo, 2.5), rng.uniform(-2, 2)])
            E = metric.frame(p)
            eta = np.diag([-1.0, 1.0, 1.0])
            assert np.max(np.abs(E.T @ metric.g(p) @ E - eta)) < 1e-10
            assert E[0, 0] > 0


def test_geodesic_flow_minkowski_straight(mink3):
    p, xi = np.array([0.5, 1.0, -1.0]), np.array([1.0, 0.6, 0.8])
    curve = geodesic_flow(mink3, p, xi, (0.0, 10.0))
    for t in (0.0, 3.0, 10.0):
        assert np.allclose(curve.position(t), p + t * xi, atol=1e-9)


def test_geodesic_flow_reproduces_example_variation(mink3):
    from lightray.catalog import example_mu, example_mu_dt, example_mu_variation
    for s0 in (-0.7, 0.3, 1.0):
        curve = geodesic_flow(mink3, example_mu(s0), example_mu_dt(s0, 0.0), (0.0, 2.0))
        for tau in (0.5, 2.0):
            assert np.allclose(curve.position(tau), example_mu_variation(s0, tau), atol=1e-9)


def test_geodesic_null_norm_conserved(geps):
    p = np.array([0.0, 0.0, 0.0])
    xi = np.array([1.0, 0.6, 0.8])
    loose = geodesic_flow(geps, p, xi, (0.0, 10.0))
    tight = geodesic_flow(geps, p, xi, (0.0, 10.0), rtol=1e-11, atol=1e-11)
    for t in np.linspace(0, 10, 11):
        x, v = loose.position(t), loose.velocity(t)
        assert abs(geps.inner(x, v, v)) < 1e-8
    assert np.max(np.abs(loose.position(10.0) - tight.position(10.0))) < 1e-7


def test_geodesic_timelike_norm_einstein(einstein):
    p = np.array([0.0, 1.4, 0.0])
    xi = np.array([1.5, 0.3, 0.5])
    c0 = einstein.inner(p, xi, xi)
    curve = geodesic_flow(einstein, p, xi, (-3.0, 3.0))
    for t in (-3.0, 1.0, 3.0):
        x, v = curve.position(t), curve.velocity(t)
        assert abs(einstein.inner(x, v, v) - c0) < 1e-8


def line_curve(start, vel, interval=(0.0, 1.0)):
    start, vel = np.asarray(start, float), np.asarray(vel, float)
    return CurveSample(interval, lambda s: start + s * vel, lambda s: vel)


def test_parallel_transport_minkowski_constant(mink3):
    curve = line_curve([0, 0, 0], [-1.0, 0.3, 0.2])
    u0 = np.array([1.0, 0.0, 1.0])
    assert np.allclose(parallel_transport(mink3, curve, u0, 1.0).comps, u0, atol=1e-12)


def test_parallel_transport_isometry_and_future(geps, rng):
    curve = CurveSample((0.0, 1.0), lambda s: np.array([s, 0.3 * np.sin(s), s * s]),
                       lambda s: np.array([1.0, 0.3 * np.cos(s), 2 * s]))
    for _ in range(5):
        u, w = rng.standard_normal(3), rng.standard_normal(3)
        p0 = curve.position(0.0)
        for s in (0.4, 1.0):
            us = parallel_transport(geps, curve, u, s).comps
            ws = parallel_transport(geps, curve, w, s).comps
            ps = curve.position(s)
            assert abs(geps.inner(ps, us, ws) - geps.inner(p0, u, w)) < 1e-8
    null = np.array([1.0, 0.0, 1.0])
    for s in np.linspace(0, 1, 6):
        us = parallel_transport(geps, curve, null, s).comps
        ps = curve.position(s)
        assert geps.inner(ps, us, geps.frame(ps)[:, 0]) < 0


@pytest.mark.parametrize("v, expected", [
    ([1.0, 0.0, 0.0], CausalCharacter.TIMELIKE_FUTURE),
    ([1.0, 1.0, 0.0], CausalCharacter.NULL_FUTURE),
    ([-1.0, 1.0, 0.0], CausalCharacter.NULL_PAST),
    ([-2.0, 1.0, 0.0], CausalCharacter.TIMELIKE_PAST),
    ([0.0, 1.0, 0.0], CausalCharacter.SPACELIKE),
    ([0.0, 0.0, 0.0], CausalCharacter.ZERO),
])
def test_causal_character_examples(mink3, v, expected):
    assert causal_character(mink3, TangentVector(np.zeros(3), np.array(v))) is expected


def test_causal_character_negation_swaps(geps, rng):
    swap = {CausalCharacter.NULL_FUTURE: CausalCharacter.NULL_PAST,
            CausalCharacter.NULL_PAST: CausalCharacter.NULL_FUTURE,
            CausalCharacter.TIMELIKE_FUTURE: CausalCharacter.TIMELIKE_PAST,
            CausalCharacter.TIMELIKE_PAST: CausalCharacter.TIMELIKE_FUTURE,
            CausalCharacter.SPACELIKE: CausalCharacter.SPACELIKE}
    p = np.array([0.3, 0.0, 0.0])
    for _ in range(200):
        v = rng.standard_normal(3)
        c = causal_character(geps, TangentVector(p, v))
        assert causal_character(geps, TangentVector(p, -v)) is swap[c]


def test_cotton_minkowski_zero(mink3):
    assert np.max(np.abs(cotton_tensor(mink3, np.array([0.2, 1.0, -1.0])))) < 1e-10


def test_cotton_geps_nonzero_and_antisymmetric(geps, rng):
    C = cotton_tensor(geps, np.array([0.25, 0.0, 0.0]))
    past = cotton_tensor(geps, np.array([-0.25, 0.0, 0.0]))
    assert np.max(np.abs(C)) > 1e3 * max(np.max(np.abs(past)), 1e-12)
    for _ in range(20):
        p = np.array([rng.uniform(0.1, 1.5), *rng.uniform(-2, 2, 2)])
        C = cotton_tensor(geps, p)
        assert np.max(np.abs(C + np.swapaxes(C, 1, 2))) < 1e-10 * max(1.0, np.max(np.abs(C)))


def test_cotton_requires_dim3(mink4):
    with pytest.raises(DimensionError):
        cotton_tensor(mink4, np.zeros(4))


def test_validate_metric_rejects_riemannian():
    metric = MetricSpec(dim=3, components=lambda p: np.eye(3), name="euclid")
    with pytest.raises(ValueError, match="signature"):
        validate_metric(metric, [np.zeros(3)])


def test_perturbed_minkowski_determinant():
    entry = make_perturbed_minkowski(0.5)
    for t in (-1.0, 0.0, 0.25, 1.0, 5.0):
        assert abs(np.linalg.det(entry.metric.g(np.array([t, 0.0, 0.0]))) + 1.0) < 1e-12
