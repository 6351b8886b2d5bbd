"""The contact form on the space of light rays, sky tangent spaces and celestial vectors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import FrameError
from .jacobi import (JacobiState, TangentRayVector, _reduce, propagate_fields, reduce_mod_gamma,
                     sky_complement)
from .rays import LightRay

CONTACT_TOL = 1e-8
ROOT_GRID = 512
ROOT_TOL = 1e-7


@dataclass(frozen=True)
class ContactValue:
    """alpha(J) = g(J(t), gamma'(t)) with the ray's canonical parametrization.

    ``sign`` is the co-orientation: +1, -1, or 0 when |value| <= ``tol``.
    """

    value: float
    sign: int

    @classmethod
    def of(cls, value, tol=CONTACT_TOL):
        value = float(value)
        return cls(value, 0 if abs(value) <= tol else int(np.sign(value)))


def _as_state(obj) -> JacobiState:
    if isinstance(obj, TangentRayVector):
        return obj.representative()
    if isinstance(obj, JacobiState):
        return obj
    raise TypeError(f"expected a TangentRayVector or JacobiState, got {type(obj).__name__}")


def contact_value(state: JacobiState) -> float:
    x, v = state.ray.state(state.t)
    return state.ray.metric.inner(x, state.J, v)


def contact_form(cls, tol=CONTACT_TOL) -> ContactValue:
    """alpha of a tangent vector to N, evaluated on a representative at its own parameter."""
    return ContactValue.of(contact_value(_as_state(cls)), tol)


def contact_along(cls, ts) -> np.ndarray:
    """g(J(t), gamma'(t)) at each ``t``; constant for admissible fields."""
    state = _as_state(cls)
    ts = np.atleast_1d(np.asarray(ts, float))
    out = np.empty(ts.size)
    ray, metric = state.ray, state.ray.metric
    for side in (ts >= state.t, ts < state.t):
        idx = np.flatnonzero(side)
        if idx.size == 0:
            continue
        order = idx[np.argsort(np.abs(ts[idx] - state.t))]
        xs, vs, J, _ = propagate_fields(ray, state.t, state.J, state.Jp, ts[order])
        for n, i in enumerate(order):
            out[i] = metric.inner(xs[n], J[n, 0], vs[n])
    return out


# ---------------------------------------------------------------------------
# skies


@dataclass(frozen=True, eq=False)
class SkyTangentBasis:
    """Tangent space at ``ray`` of the sky of gamma(s0), as classes reduced at t = 0."""

    ray: LightRay
    s0: float
    elements: tuple

    def matrix(self) -> np.ndarray:
        """Columns (v, w) chart-style coordinates of each element."""
        return np.column_stack([np.concatenate(e.coords) for e in self.elements])

    def reduced(self) -> np.ndarray:
        """Columns (vbar, wbar) without the vanishing first entries; chart independent."""
        return np.column_stack([np.concatenate([e.vbar[1:], e.wbar[1:]]) for e in self.elements])


def sky_tangent_basis(ray: LightRay, s0, at=0.0) -> SkyTangentBasis:
    """m-2 classes with J(s0) = 0 and J'(s0) running over a spacelike complement of gamma'(s0).

    The classes are reduced at parameter ``at``.
    """
    metric = ray.metric
    m = metric.dim
    x0, v0 = ray.state(s0)
    xi = sky_complement(metric, x0, v0)
    gram = np.array([[metric.inner(x0, a, b) for b in xi] for a in xi])
    if np.max(np.abs(gram - np.eye(m - 2))) > 1e-8:
        raise FrameError(f"degenerate spacelike complement of gamma' at s0={s0}")
    zeros = np.zeros_like(xi)
    if at == s0:
        xs, vs, J, Jp = x0[None], v0[None], zeros[None], xi[None]
    else:
        xs, vs, J, Jp = propagate_fields(ray, s0, zeros, xi, [at])
    elements = []
    for a in range(m - 2):
        vbar, wbar = _reduce(metric, xs[0], vs[0], J[0, a], Jp[0, a])
        elements.append(TangentRayVector(ray, float(at), vbar, wbar))
    basis = SkyTangentBasis(ray, float(s0), tuple(elements))
    if np.linalg.matrix_rank(basis.reduced(), tol=1e-10) < m - 2:
        raise FrameError("sky tangent classes are linearly dependent")
    return basis


def sky_intersection_dim(ray: LightRay, s1, s2, tol=1e-8) -> int:
    """Dimension of the intersection of the sky tangent spaces of gamma(s1) and gamma(s2) at ``ray``.

    Zero is the normal-neighbourhood condition for the two skies.
    """
    M = np.column_stack([sky_tangent_basis(ray, s1).reduced(), sky_tangent_basis(ray, s2).reduced()])
    sv = np.linalg.svd(M, compute_uv=False)
    rank = int(np.sum(sv > tol * max(1.0, sv[0])))
    return M.shape[1] - rank


# ---------------------------------------------------------------------------
# celestial test


def _residual_fn(metric, sol):
    m = metric.dim

    def r(t):
        y = sol(t)
        _, wbar = _reduce(metric, y[:m], y[m:2 * m], y[2 * m:3 * m], y[3 * m:4 * m])
        return wbar[1:]

    return r


def _gauss_newton(r, t, scale, tol, lo, hi, h=1e-6, iters=30):
    for _ in range(iters):
        rv = r(t)
        if np.linalg.norm(rv) < 1e-3 * tol * scale:
            break
        a, b = max(lo, t - h), min(hi, t + h)
        dr = (r(b) - r(a)) / (b - a)
        den = float(dr @ dr)
        if den == 0.0:
            break
        step = -float(rv @ dr) / den
        t_new = min(hi, max(lo, t + step))
        if abs(t_new - t) < 1e-15 * max(1.0, abs(t)):
            t = t_new
            break
        t = t_new
    return t, float(np.linalg.norm(r(t)))


def celestial_roots(cls, t_range, grid=ROOT_GRID, tol=ROOT_TOL):
    """Parameters t in ``t_range`` where J(t) is proportional to gamma'(t).

    The residual is the reduced class J(t) mod gamma'(t), which vanishes exactly
    at the roots of h(t) = g(J, J) once the contact value is zero; minima of its
    norm on a grid are polished by Gauss-Newton (Newton on sqrt(h)).
    """
    state = _as_state(cls)
    ray, metric = state.ray, state.ray.metric
    a, b = float(t_range[0]), float(t_range[1])
    if not a < b:
        raise ValueError("t_range must be an increasing pair")
    scale = max(reduce_mod_gamma(state).norm(), 1e-300)
    nodes = np.linspace(a, b, grid)
    roots = []
    for side, lo, hi in ((nodes[nodes >= state.t], max(a, state.t), b),
                         (nodes[nodes < state.t][::-1], a, min(b, state.t))):
        if side.size == 0:
            continue
        ends = np.array([side[0], side[-1]]) if side.size > 1 else side
        t_far = ends[np.argmax(np.abs(ends - state.t))]
        *_, sol = propagate_fields(ray, state.t, state.J, state.Jp, [t_far], dense=True)
        r = _residual_fn(metric, sol)
        ts = side
        vals = np.array([np.linalg.norm(r(t)) for t in ts])
        for i in range(vals.size):
            left = vals[i - 1] if i > 0 else np.inf
            right = vals[i + 1] if i < vals.size - 1 else np.inf
            if vals[i] <= left and vals[i] <= right:
                t_star, res = _gauss_newton(r, ts[i], scale, tol, lo, hi)
                if res < tol * scale and not any(abs(t_star - q) < 1e-6 for q in roots):
                    roots.append(float(t_star))
    return sorted(roots)


def is_celestial(cls, t_range, grid=ROOT_GRID, tol=ROOT_TOL, contact_tol=CONTACT_TOL) -> Optional[float]:
    """A witness t* with J(t*) proportional to gamma'(t*), or None.

    Classes with nonzero contact value are rejected without a search. When
    several roots exist the one of least |t| is returned.
    """
    state = _as_state(cls)
    scale = max(1.0, np.linalg.norm(state.J), np.linalg.norm(state.Jp))
    if abs(contact_value(state)) > contact_tol * scale:
        return None
    roots = celestial_roots(state, t_range, grid=grid, tol=tol)
    if not roots:
        return None
    return min(roots, key=abs)
