import numpy as np
import pytest

from lightray.catalog import (example_mu, example_mu_ds, example_mu_dt, example_mu_profile,
                              example_mu_variation)
from lightray.curves import coefficient_curve
from lightray.errors import ContinuationLostError, NonRegularCurveError
from lightray.geometry import CausalCharacter, CurveSample
from lightray.isotopy import (IsotopyProfile, IsotopySign, Verdict, celestial_recover,
                              classify_celestial_curve, classify_curve, classify_profile,
                              isotopy_from_curve, pointwise_verdict, random_sphere_reparametrization,
                              reparam_invariance_check, rotation_reparametrization, sign_profile,
                              vector_dual_causality)
from lightray.jacobi import Variation


def line(vel, start=(0.0, 0.0, 0.0)):
    start, vel = np.asarray(start, float), np.asarray(vel, float)
    return CurveSample((0.0, 1.0), lambda s: start + s * vel, lambda s: vel)


def example_variation(metric):
    return Variation(metric, example_mu_variation, example_mu_ds, example_mu_dt)


def helix_variation(metric):
    """Rays along the past null helix nu(s) = (-s, cos s, sin s) with direction -nu'."""
    def f(s, t):
        return np.array([-s + t, np.cos(s) + t * np.sin(s), np.sin(s) - t * np.cos(s)])

    def ds(s, t):
        return np.array([-1.0, -np.sin(s) + t * np.cos(s), np.cos(s) + t * np.sin(s)])

    def dt(s, t):
        return np.array([1.0, np.sin(s), -np.cos(s)])

    return Variation(metric, f, ds, dt)


def test_sign_profile_constant_time_curves(mink3):
    for vel, val in (([-1.0, 0.0, 0.0], 1.0), ([1.0, 0.0, 0.0], -1.0)):
        prof = sign_profile(isotopy_from_curve(mink3, line(vel), n=16, s_grid=np.linspace(0, 1, 11)))
        assert np.allclose(prof.values, val, atol=1e-12)


def test_sign_profile_example_curve(mink3):
    curve = CurveSample((-1.0, 1.0), example_mu, lambda s: s * np.array([1.0, np.cos(s), np.sin(s)]))
    s_grid = np.linspace(-1, 1, 41)
    prof = sign_profile(isotopy_from_curve(mink3, curve, n=32, s_grid=s_grid))
    theta = np.arctan2(prof.units[:, 1], prof.units[:, 0])
    exact = example_mu_profile(theta[:, None], s_grid[None, :])
    assert np.max(np.abs(prof.values - exact)) < 1e-12


def test_isotopy_minkowski_transport_constant(mink3):
    field = isotopy_from_curve(mink3, line([-1.0, 0.3, 0.1]), n=8, s_grid=np.linspace(0, 1, 5))
    assert np.allclose(field.directions, field.directions[0][None], atol=1e-14)


def test_isotopy_constant_curve_is_sky(mink3):
    field = isotopy_from_curve(mink3, line([0.0, 0.0, 0.0], start=[0.2, 0.0, 0.0]), n=8,
                               s_grid=np.linspace(0, 1, 4))
    assert np.allclose(field.directions, field.directions[0][None])
    cls = classify_profile(sign_profile(field))
    assert cls.sign is IsotopySign.DEGENERATE and cls.verdict is Verdict.CONSTANT_CURVE


def test_isotopy_rays_pass_through_curve(geps):
    curve = coefficient_curve([{"1": 0.5, "s": -1.0}, {"sin": 0.3}, {}])
    field = isotopy_from_curve(geps, curve, n=6, s_grid=np.linspace(0, 1, 3))
    for j in range(3):
        for i in range(6):
            ray = field.ray(i, j)
            assert np.linalg.norm(ray.point(ray.mark) - curve.position(field.s_grid[j])) < 1e-7


def test_classify_profile_examples():
    s = np.linspace(-1, 1, 5)
    ones = IsotopyProfile(np.ones((4, 5)), s, np.zeros((4, 2)))
    cls = classify_profile(ones)
    assert cls.sign is IsotopySign.NON_NEGATIVE and cls.verdict is Verdict.CAUSAL_PAST
    cls = classify_profile(IsotopyProfile(-np.ones((4, 5)), s, np.zeros((4, 2))))
    assert cls.verdict is Verdict.CAUSAL_FUTURE
    zero = classify_profile(IsotopyProfile(np.zeros((4, 5)), s, np.zeros((4, 2))))
    assert zero.sign is IsotopySign.DEGENERATE and zero.verdict is Verdict.CONSTANT_CURVE
    tiny = np.ones((4, 5))
    tiny[0, 2] = -1e-12
    assert classify_profile(IsotopyProfile(tiny, s, np.zeros((4, 2)))).sign is IsotopySign.NON_NEGATIVE


def test_classify_example_curve_mixed_with_windows(mink3):
    curve = CurveSample((-1.0, 1.0), example_mu, lambda s: s * np.array([1.0, np.cos(s), np.sin(s)]))
    cls, prof = classify_curve(mink3, curve)
    assert cls.sign is IsotopySign.MIXED and cls.verdict is Verdict.NOT_CAUSAL
    labels = [lab for lab, _, _ in cls.intervals]
    assert labels[0] == "+" and labels[-1] == "-"
    assert classify_profile(prof, window=(-1.0, -1e-3)).verdict is Verdict.CAUSAL_PAST
    assert classify_profile(prof, window=(1e-3, 1.0)).verdict is Verdict.CAUSAL_FUTURE
    with pytest.raises(ValueError):
        classify_profile(prof, window=(2.0, 3.0))


def test_profile_class_independent_of_grid(geps):
    curve = coefficient_curve([{"1": 0.3, "s": -1.0, "s2": -0.2}, {"sin": 0.4}, {"s2": 0.2}])
    for k in (11, 51, 201):
        cls, _ = classify_curve(geps, curve, n=16, s_grid=np.linspace(0, 1, k))
        assert cls.verdict is Verdict.CAUSAL_PAST
        assert pointwise_verdict(geps, curve, np.linspace(0, 1, k)) is Verdict.CAUSAL_PAST


def test_spacelike_curve_not_causal(geps):
    curve = coefficient_curve([{"s": 0.1}, {"s": 1.0}, {}])
    cls, _ = classify_curve(geps, curve, n=32, s_grid=np.linspace(0, 1, 21))
    assert cls.verdict is Verdict.NOT_CAUSAL
    assert pointwise_verdict(geps, curve, np.linspace(0, 1, 21)) is Verdict.NOT_CAUSAL


def test_reparam_invariance(mink3, rng):
    field = isotopy_from_curve(mink3, line([-1.0, 0.0, 0.0]), n=32, s_grid=np.linspace(0, 1, 21))
    assert reparam_invariance_check(field, lambda s, u: u)
    assert reparam_invariance_check(field, rotation_reparametrization)
    curve = CurveSample((-1.0, 1.0), example_mu, lambda s: s * np.array([1.0, np.cos(s), np.sin(s)]))
    mixed = isotopy_from_curve(mink3, curve, n=64)
    for _ in range(3):
        assert reparam_invariance_check(mixed, random_sphere_reparametrization(3, rng))


def test_reparam_invariance_m4(mink4, rng):
    field = isotopy_from_curve(mink4, line([-1.0, 0.2, 0.1, 0.0], start=np.zeros(4)), n=64, s_grid=np.linspace(0, 1, 11))
    assert reparam_invariance_check(field, random_sphere_reparametrization(4, rng))


@pytest.mark.parametrize("v, past, char", [
    ([-1.0, 0.0, 0.0], True, CausalCharacter.TIMELIKE_PAST),
    ([0.0, 1.0, 0.0], False, CausalCharacter.SPACELIKE),
    ([-1.0, 1.0, 0.0], True, CausalCharacter.NULL_PAST),
    ([1.0, 0.0, 1.0], False, CausalCharacter.NULL_FUTURE),
])
def test_vector_dual_examples(mink3, v, past, char):
    res = vector_dual_causality(mink3, np.zeros(3), v)
    assert res.causal_past is past and res.character is char and res.agrees


def test_vector_dual_spacelike_min_at_pi(mink3):
    res = vector_dual_causality(mink3, np.zeros(3), [0.0, 1.0, 0.0])
    assert abs(res.min_value + 1.0) < 1e-12


def test_vector_dual_agrees_random(geps, mink4, rng):
    for metric, p in ((geps, np.array([0.3, 0.0, 0.0])), (mink4, np.zeros(4))):
        for _ in range(100):
            v = rng.standard_normal(metric.dim)
            assert vector_dual_causality(metric, p, v).agrees
    with pytest.raises(ValueError):
        vector_dual_causality(geps, np.zeros(3), np.zeros(3))


def test_recover_example_variation(mink3):
    rec = celestial_recover(mink3, example_variation(mink3), (0.0, 0.0), (-1.0, 1.0), n_s=41)
    assert np.max(np.abs(rec.t_nodes)) < 1e-10
    for s in np.linspace(-1, 1, 7):
        assert np.allclose(rec.mu(s), example_mu(s), atol=1e-10)
        assert np.allclose(rec.mu_velocity(s), s * np.array([1.0, np.cos(s), np.sin(s)]), atol=1e-8)
    assert rec.checks["null"] < 1e-8 and rec.checks["orthogonal"] < 1e-8


def test_recover_sky_curve_is_constant(mink3):
    p = np.array([0.5, 0.2, -0.1])

    def f(s, t):
        return p + (t - 1.0) * np.array([1.0, np.cos(s), np.sin(s)])

    var = Variation(mink3, f, lambda s, t: (t - 1.0) * np.array([0.0, -np.sin(s), np.cos(s)]),
                    lambda s, t: np.array([1.0, np.cos(s), np.sin(s)]))
    rec = celestial_recover(mink3, var, (0.0, 1.0), (0.0, 2.0), n_s=11)
    assert np.allclose(rec.t_nodes, 1.0, atol=1e-10)
    assert max(np.linalg.norm(rec.mu(s) - p) for s in rec.s_nodes) < 1e-10
    cls, _, _ = classify_celestial_curve(mink3, var, (0.0, 1.0), (0.0, 2.0), n=16, n_s=11)
    assert cls.sign is IsotopySign.DEGENERATE and cls.verdict is Verdict.CONSTANT_CURVE


def test_recover_rejects_translation_family(mink3):
    # parallel rays shifted sideways: J is never proportional to gamma'
    var = Variation(mink3, lambda s, t: np.array([t, t, s]), lambda s, t: np.array([0.0, 0.0, 1.0]),
                    lambda s, t: np.array([1.0, 1.0, 0.0]))
    with pytest.raises(NonRegularCurveError):
        celestial_recover(mink3, var, (0.0, 0.0), (-1.0, 1.0), n_s=11)


def test_recover_rejects_off_root_seed(mink3):
    var = helix_variation(mink3)
    shifted = Variation(mink3, lambda s, t: var.f(s, t) + np.array([0.0, 0.0, 5.0 * s]),
                        lambda s, t: var.df_ds(s, t) + np.array([0.0, 0.0, 5.0]), var.df_dt)
    with pytest.raises(ContinuationLostError):
        celestial_recover(mink3, shifted, (0.0, 0.0), (0.0, 1.0), n_s=11)


def test_classify_celestial_examples(mink3):
    cls, rec, prof = classify_celestial_curve(mink3, helix_variation(mink3), (0.0, 0.0), (0.0, 1.0),
                                              n=32, n_s=41)
    assert cls.verdict is Verdict.CAUSAL_PAST
    assert max(np.linalg.norm(rec.mu(s) - [-s, np.cos(s), np.sin(s)]) for s in rec.s_nodes) < 1e-10
    cls, _, prof = classify_celestial_curve(mink3, example_variation(mink3), (0.0, 0.0), (-1.0, 1.0))
    assert cls.sign is IsotopySign.MIXED
    assert classify_profile(prof, window=(-1.0, -0.005)).verdict is Verdict.CAUSAL_PAST
    assert classify_profile(prof, window=(0.005, 1.0)).verdict is Verdict.CAUSAL_FUTURE


def test_recover_parallel_lift_geps(geps):
    from scipy.integrate import solve_ivp

    # a past null curve through the bump region that is not a geodesic
    def rhs(s, x):
        return geps.frame(x) @ np.array([-1.0, np.cos(2 * s), np.sin(2 * s)])

    sol = solve_ivp(rhs, (0.0, 1.0), [0.6, 0.0, 0.0], method="DOP853", rtol=1e-13, atol=1e-13,
                    dense_output=True)

    def nu(s):
        return sol.sol(s)

    def sigma(s):
        return -rhs(s, nu(s))

    var = Variation.from_lift(geps, nu, sigma, offset=lambda s: 0.3 * s)
    rec = celestial_recover(geps, var, (0.0, 0.0), (0.0, 1.0), n_s=9, alt_grid=8)
    for s in rec.s_nodes:
        assert abs(rec.t(s) - 0.3 * s) < 1e-6
        assert np.linalg.norm(rec.mu(s) - nu(s)) < 1e-6
    assert rec.checks["null"] < 1e-8 and rec.checks["orthogonal"] < 1e-8
