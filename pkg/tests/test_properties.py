import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lightray.catalog import make_minkowski, make_perturbed_minkowski
from lightray.geometry import CausalCharacter, TangentVector, causal_character
from lightray.isotopy import IsotopyProfile, classify_profile, vector_dual_causality
from lightray.jacobi import JacobiState, reduce_mod_gamma, tn_chart, tn_chart_inverse
from lightray.rays import LightRay, RayChart, ray_coords, ray_from_coords, ray_from_event_direction

MINK3 = make_minkowski(3).metric
GEPS = make_perturbed_minkowski(0.5).metric
finite = st.floats(-3.0, 3.0, allow_nan=False)
angle = st.floats(-np.pi, np.pi, allow_nan=False)


@settings(max_examples=50, deadline=None)
@given(x=finite, y=finite, th=angle, lam=st.floats(0.05, 20.0))
def test_ray_scale_invariance(x, y, th, lam):
    p = np.array([0.3, x, y])
    xi = GEPS.frame(p) @ np.array([1.0, np.cos(th), np.sin(th)])
    a = ray_from_event_direction(GEPS, p, xi)
    b = ray_from_event_direction(GEPS, p, lam * xi)
    assert a.same_as(b, tol=1e-8)
    assert abs(np.linalg.norm(a.direction) - 1.0) < 1e-14


@settings(max_examples=50, deadline=None)
@given(x=finite, y=finite, th=angle)
def test_angle_chart_round_trip(x, y, th):
    chart = RayChart(MINK3, kind="angle")
    ray = ray_from_coords(chart, [x, y], [th])
    xx, u = ray_coords(chart, ray)
    assert np.allclose(xx, [x, y]) and abs(np.angle(np.exp(1j * (u[0] - th)))) < 1e-12


@settings(max_examples=50, deadline=None)
@given(coords=st.lists(st.floats(-2.0, 2.0), min_size=5, max_size=5), u=st.floats(-0.9, 0.9))
def test_tn_chart_round_trip(coords, u):
    chart = RayChart(GEPS, level=0.25)
    c = np.array([coords[0], coords[1], u, coords[2], coords[3], coords[4]])
    back = tn_chart(chart, tn_chart_inverse(chart, c))
    assert np.max(np.abs(back - c)) < 1e-8


@settings(max_examples=100, deadline=None)
@given(J=st.lists(finite, min_size=3, max_size=3), Jp=st.lists(finite, min_size=3, max_size=3),
       a=finite, b=finite)
def test_reduction_ignores_tangential_shift(J, Jp, a, b):
    ray = LightRay(MINK3, np.zeros(3), np.array([0.6, 0.8]))
    state = JacobiState(ray, 0.0, np.array(J), np.array(Jp))
    r0 = reduce_mod_gamma(state)
    r1 = reduce_mod_gamma(state.shifted(a, b))
    assert np.allclose(r0.vbar, r1.vbar, atol=1e-12) and np.allclose(r0.wbar, r1.wbar, atol=1e-12)


@settings(max_examples=200, deadline=None)
@given(v=st.lists(finite, min_size=3, max_size=3))
def test_causal_character_sign_symmetry(v):
    v = np.array(v)
    p = np.array([0.3, 0.0, 0.0])
    c = causal_character(GEPS, TangentVector(p, v))
    d = causal_character(GEPS, TangentVector(p, -v))
    if c in (CausalCharacter.SPACELIKE, CausalCharacter.ZERO):
        assert d is c
    else:
        assert c.is_past == d.is_future


@settings(max_examples=100, deadline=None)
@given(v=st.lists(finite, min_size=3, max_size=3).filter(lambda v: np.linalg.norm(v) > 1e-3))
def test_dual_causality_agrees(v):
    assert vector_dual_causality(MINK3, np.zeros(3), np.array(v)).agrees


@settings(max_examples=100, deadline=None)
@given(vals=st.lists(st.floats(-5.0, 5.0), min_size=12, max_size=12), scale=st.floats(0.01, 100.0))
def test_classification_scale_invariant(vals, scale):
    values = np.array(vals).reshape(3, 4)
    s = np.linspace(0, 1, 4)
    a = classify_profile(IsotopyProfile(values, s, np.zeros((3, 2))))
    b = classify_profile(IsotopyProfile(scale * values, s, np.zeros((3, 2))))
    if np.max(np.abs(values)) > 1e-6:
        assert a.sign is b.sign
