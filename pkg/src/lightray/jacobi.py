"""Jacobi fields along light rays, the mod-gamma' reduction and the (x, u, v, w) chart.

Jacobi fields are carried as (J, J') with J' the covariant derivative along the
ray. The first-order system integrated is

    x' = v,  v' = -Gamma(v, v),
    J' = P - Gamma(v, J),  P' = -Gamma(v, P) - R(J, v)v,

so that P = DJ/dt.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _ode
from .errors import ChartError, RegularityError
from .geometry import H_GAMMA, MetricSpec, christoffel, riemann
from .rays import LightRay, RayChart, ray_coords, ray_from_coords

ADMISSIBLE_TOL = 1e-8
REGULARITY_COND = 1e12


@dataclass(frozen=True, eq=False)
class JacobiState:
    """(t, J(t), J'(t)) along ``ray``; J' is the covariant derivative."""

    ray: LightRay
    t: float
    J: np.ndarray
    Jp: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "J", np.asarray(self.J, dtype=float))
        object.__setattr__(self, "Jp", np.asarray(self.Jp, dtype=float))

    def shifted(self, a, b):
        """The state of J + (a t + b) gamma'."""
        _, v = self.ray.state(self.t)
        return JacobiState(self.ray, self.t, self.J + (a * self.t + b) * v, self.Jp + a * v)

    def __add__(self, other):
        if other.ray is not self.ray or other.t != self.t:
            raise ValueError("can only add Jacobi states on the same ray at the same parameter")
        return JacobiState(self.ray, self.t, self.J + other.J, self.Jp + other.Jp)

    def __mul__(self, c):
        return JacobiState(self.ray, self.t, c * self.J, c * self.Jp)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class TangentRayVector:
    """Class [J] = J mod (at+b)gamma' at parameter ``t``, as reduced frame components.

    ``vbar`` and ``wbar`` are the full frame-component vectors of the reduced
    representatives of J'(t) and J(t); their first entries vanish.
    """

    ray: LightRay
    t: float
    vbar: np.ndarray
    wbar: np.ndarray

    @property
    def coords(self):
        """The independent entries (v^3..v^m, w^2..w^m)."""
        return self.vbar[2:].copy(), self.wbar[1:].copy()

    def representative(self) -> JacobiState:
        x, _ = self.ray.state(self.t)
        E = self.ray.metric.frame(x)
        return JacobiState(self.ray, self.t, E @ self.wbar, E @ self.vbar)

    def norm(self) -> float:
        return float(np.hypot(np.linalg.norm(self.vbar), np.linalg.norm(self.wbar)))

    def __add__(self, other):
        if other.ray is not self.ray or other.t != self.t:
            raise ValueError("can only add tangent vectors at the same ray")
        return TangentRayVector(self.ray, self.t, self.vbar + other.vbar, self.wbar + other.wbar)

    def __mul__(self, c):
        return TangentRayVector(self.ray, self.t, c * self.vbar, c * self.wbar)

    __rmul__ = __mul__


# ---------------------------------------------------------------------------
# propagation


def _jacobi_rhs(metric: MetricSpec, k: int):
    m = metric.dim

    def rhs(t, y):
        x, v = y[:m], y[m:2 * m]
        J = y[2 * m:2 * m + k * m].reshape(k, m)
        P = y[2 * m + k * m:].reshape(k, m)
        out = np.empty_like(y)
        out[:m] = v
        if metric.flat:
            out[m:2 * m] = 0.0
            out[2 * m:2 * m + k * m] = P.ravel()
            out[2 * m + k * m:] = 0.0
            return out
        gam = christoffel(metric, x)
        R = riemann(metric, x)
        gv = np.einsum("kij,i->kj", gam, v)       # Gamma^k_ij v^i
        out[m:2 * m] = -gv @ v
        out[2 * m:2 * m + k * m] = (P - J @ gv.T).ravel()
        Rvv = np.einsum("abcd,b,d->ac", R, v, v)  # (R(J, v)v)^a = Rvv[a, c] J^c
        out[2 * m + k * m:] = (-(P @ gv.T) - J @ Rvv.T).ravel()
        return out

    return rhs


def propagate_fields(ray: LightRay, t0, Js, Jps, t_eval, rtol=_ode.RTOL, atol=_ode.ATOL,
                     dense=False):
    """Propagate ``k`` Jacobi fields given at ``t0`` along ``ray``.

    ``t_eval`` must be monotone and start on the side of ``t0`` it extends to.
    Returns ``(xs, vs, J, Jp)`` with shapes (n, m), (n, m), (n, k, m), (n, k, m);
    with ``dense=True`` also the scipy dense solution as a fifth item.
    """
    metric = ray.metric
    m = metric.dim
    Js = np.atleast_2d(np.asarray(Js, float))
    Jps = np.atleast_2d(np.asarray(Jps, float))
    k = Js.shape[0]
    t_eval = np.atleast_1d(np.asarray(t_eval, float))
    x0, v0 = ray.state(t0)
    y0 = np.concatenate([x0, v0, Js.ravel(), Jps.ravel()])
    t1 = float(t_eval[np.argmax(np.abs(t_eval - t0))])
    sol = _ode.integrate(_jacobi_rhs(metric, k), float(t0), t1, y0, rtol=rtol, atol=atol,
                         dense_output=True)
    Y = np.atleast_2d(sol.sol(t_eval).T) if t_eval.size else np.empty((0, y0.size))
    if metric.domain is not None:
        for x in sol.y[:m].T:
            if not metric.in_domain(x):
                from .errors import DomainError
                raise DomainError(f"ray left the domain of {metric.name} at {x}")
    n = t_eval.size
    out = (Y[:, :m], Y[:, m:2 * m], Y[:, 2 * m:2 * m + k * m].reshape(n, k, m),
           Y[:, 2 * m + k * m:].reshape(n, k, m))
    return out + (sol.sol,) if dense else out


def check_admissible(state: JacobiState, tol=ADMISSIBLE_TOL):
    """Require g(J', gamma') = 0, which makes g(J, gamma') constant."""
    x, v = state.ray.state(state.t)
    val = state.ray.metric.inner(x, state.Jp, v)
    scale = max(1.0, np.linalg.norm(state.Jp) * np.linalg.norm(v))
    if abs(val) > tol * scale:
        raise ValueError(f"J' is not orthogonal to gamma' (g(J', gamma') = {val:.3e}); "
                         "the field does not come from a variation through light rays")


def propagate_jacobi(state: JacobiState, t1, rtol=_ode.RTOL, atol=_ode.ATOL) -> JacobiState:
    """The Jacobi state at ``t1`` with the same field as ``state``."""
    check_admissible(state)
    _, _, J, Jp = propagate_fields(state.ray, state.t, state.J, state.Jp, [t1], rtol=rtol, atol=atol)
    return JacobiState(state.ray, t1, J[0, 0], Jp[0, 0])


@dataclass(frozen=True, eq=False)
class JacobiField:
    """A Jacobi field fixed by its data at ``base.t``; evaluates lazily."""

    base: JacobiState

    @property
    def ray(self):
        return self.base.ray

    def at(self, t) -> JacobiState:
        return propagate_jacobi(self.base, t)

    def sample(self, ts):
        ts = np.asarray(ts, float)
        out = [None] * ts.size
        for side in (ts >= self.base.t, ts < self.base.t):
            idx = np.flatnonzero(side)
            if idx.size == 0:
                continue
            order = idx[np.argsort(np.abs(ts[idx] - self.base.t))]
            _, _, J, Jp = propagate_fields(self.ray, self.base.t, self.base.J, self.base.Jp, ts[order])
            for n, i in enumerate(order):
                out[i] = JacobiState(self.ray, ts[i], J[n, 0], Jp[n, 0])
        return out


def sky_jacobi(ray: LightRay, tau, xi) -> JacobiField:
    """The field with J(tau) = 0 and J'(tau) = xi, tangent to the sky of gamma(tau)."""
    state = JacobiState(ray, tau, np.zeros(ray.dim), np.asarray(xi, float))
    check_admissible(state)
    return JacobiField(state)


# ---------------------------------------------------------------------------
# reduction and the TN chart


def _reduce(metric, x, v, J, Jp):
    E = metric.frame(x)
    c = np.linalg.solve(E, v)
    u = c / c[0]
    w = np.linalg.solve(E, J)
    vv = np.linalg.solve(E, Jp)
    wbar = w - w[0] * u
    vbar = vv - vv[0] * u
    wbar[0] = 0.0
    vbar[0] = 0.0
    return vbar, wbar


def reduce_mod_gamma(state: JacobiState) -> TangentRayVector:
    """Reduced representatives J - w^1 gamma', J' - v^1 gamma' at ``state.t``.

    The frame components of gamma'(t) are normalized to first entry 1.
    """
    x, v = state.ray.state(state.t)
    vbar, wbar = _reduce(state.ray.metric, x, v, state.J, state.Jp)
    return TangentRayVector(state.ray, state.t, vbar, wbar)


def to_anchor(state: JacobiState) -> JacobiState:
    return state if state.t == 0 else propagate_jacobi(state, 0.0)


def tn_chart(chart: RayChart, state: JacobiState) -> np.ndarray:
    """(x, u, v, w) in R^(4m-6) of the class of ``state``."""
    m = chart.metric.dim
    x, u = ray_coords(chart, state.ray)
    cls = reduce_mod_gamma(to_anchor(state))
    unit = state.ray.direction
    if abs(unit[0]) < 1e-12:
        raise ChartError("the (v, w) coordinates need u^2 != 0")
    v, w = cls.coords
    out = np.concatenate([x, np.atleast_1d(u), v, w])
    assert out.size == 4 * m - 6
    return out


def tn_chart_inverse(chart: RayChart, coords) -> JacobiState:
    """A representative state at t = 0 of the class with chart coordinates ``coords``."""
    m = chart.metric.dim
    coords = np.asarray(coords, float)
    x, u = coords[:m - 1], coords[m - 1:2 * m - 3]
    v, w = coords[2 * m - 3:3 * m - 5], coords[3 * m - 5:]
    ray = ray_from_coords(chart, x, u)
    unit = ray.direction
    if abs(unit[0]) < 1e-12:
        raise ChartError("the (v, w) coordinates need u^2 != 0")
    vbar = np.concatenate([[0.0, -(v @ unit[1:]) / unit[0]], v])
    wbar = np.concatenate([[0.0], w])
    return TangentRayVector(ray, 0.0, vbar, wbar).representative()


def chart_jacobi_state(chart: RayChart, x, u, xdot, udot) -> JacobiState:
    """Jacobi data at t = 0 of the ray curve s -> (x + s xdot, u + s udot).

    J(0) is the anchor velocity (0, xdot) and J'(0) = DW/ds with
    W(s) = E_1 + sum u^j(s) E_j along the anchor curve.
    """
    metric = chart.metric
    m = metric.dim
    ray = ray_from_coords(chart, x, u)
    p = ray.anchor
    J0 = np.concatenate([[0.0], np.asarray(xdot, float)])
    dunit = chart.unit_derivative(u, udot)
    head = np.concatenate([[1.0], ray.direction])
    if np.any(J0):
        dE = (metric.frame(p + H_GAMMA * J0) - metric.frame(p - H_GAMMA * J0)) / (2 * H_GAMMA)
    else:
        dE = np.zeros((m, m))
    E = metric.frame(p)
    W = E @ head
    DW = dE @ head + E @ np.concatenate([[0.0], dunit]) + np.einsum("kij,i,j->k", christoffel(metric, p), J0, W)
    return JacobiState(ray, 0.0, J0, DW)


def tangent_from_chart(chart: RayChart, x, u, xdot, udot) -> TangentRayVector:
    """The class of the Jacobi field of the ray curve with chart velocity (xdot, udot)."""
    return reduce_mod_gamma(chart_jacobi_state(chart, x, u, xdot, udot))


def change_matrix(chart: RayChart, x, u):
    """Matrix of (xdot, udot) -> (v, w) and its blocks ``(M, A, B)``.

    Raises :class:`RegularityError` when A is numerically singular.
    """
    m = chart.metric.dim
    nx, nu = m - 1, m - 2
    M = np.empty((nu + nx, nx + nu))
    for col in range(nx + nu):
        e = np.zeros(nx + nu)
        e[col] = 1.0
        v, w = tangent_from_chart(chart, x, u, e[:nx], e[nx:]).coords
        M[:, col] = np.concatenate([v, w])
    A = M[nu:, :nx]
    B = M[:nu, :nx]
    if not np.all(np.isfinite(A)) or np.linalg.cond(A) > REGULARITY_COND:
        raise RegularityError(f"coordinate-change block A is singular at x={x}, u={u}")
    return M, A, B


def coordinate_change(chart: RayChart, x, u, xdot, udot):
    """(v, w) chart components of the tangent vector (xdot, udot) at the ray (x, u)."""
    change_matrix(chart, x, u)  # regularity check
    return tangent_from_chart(chart, x, u, xdot, udot).coords


def chart_tangent(chart: RayChart, cls: TangentRayVector):
    """Inverse of :func:`coordinate_change`: (xdot, udot) for a class at t = 0."""
    m = chart.metric.dim
    if cls.t != 0:
        cls = reduce_mod_gamma(to_anchor(cls.representative()))
    x, u = ray_coords(chart, cls.ray)
    M, _, _ = change_matrix(chart, x, u)
    v, w = cls.coords
    sol = np.linalg.solve(M, np.concatenate([v, w]))
    return sol[:m - 1], sol[m - 1:]


# ---------------------------------------------------------------------------
# conjugate points


def sky_complement(metric: MetricSpec, x, v) -> np.ndarray:
    """Rows: an orthonormal spacelike basis of the complement of gamma' in gamma'^perp."""
    E = metric.frame(x)
    c = np.linalg.solve(E, v)
    unit = c[1:] / np.linalg.norm(c[1:])
    # orthonormal basis of unit^perp in R^(m-1)
    q, _ = np.linalg.qr(np.column_stack([unit, np.eye(unit.size)]))
    perp = q[:, 1:unit.size]
    return (E[:, 1:] @ perp).T


def _reduced_det(metric, x, v, J):
    E = metric.frame(x)
    c = np.linalg.solve(E, v)
    u = c / c[0]
    W = np.linalg.solve(E, J.T)          # (m, k)
    Wbar = W[1:] - np.outer(u[1:], W[0])  # (m-1, k)
    return float(np.linalg.det(np.column_stack([u[1:], Wbar])))


def conjugate_scan(ray: LightRay, tau, t_range, grid=1000, xtol=1e-10):
    """Parameters in ``t_range`` conjugate to gamma(tau).

    A basis of m-2 sky Jacobi fields vanishing at ``tau`` is propagated; the
    statistic is det[u | Wbar(t)] with Wbar the reduced components of the basis
    and u the spatial direction of gamma'(t). Sign changes on a uniform grid are
    refined by bisection. An empty list certifies the segment free of
    conjugate points at the grid resolution.
    """
    if grid < 2:
        raise ValueError("grid resolution must be positive")
    metric = ray.metric
    x0, v0 = ray.state(tau)
    basis = sky_complement(metric, x0, v0)
    k = basis.shape[0]
    a, b = float(t_range[0]), float(t_range[1])
    nodes = np.linspace(a, b, grid)
    roots = []
    for side in (nodes[nodes > tau], nodes[nodes < tau][::-1]):
        if side.size == 0:
            continue
        xs, vs, J, _, sol = propagate_fields(ray, tau, np.zeros((k, metric.dim)), basis, side, dense=True)
        m = metric.dim

        def stat(t):
            y = sol(t)
            return _reduced_det(metric, y[:m], y[m:2 * m], y[2 * m:2 * m + k * m].reshape(k, m))

        vals = np.array([_reduced_det(metric, xs[i], vs[i], J[i]) for i in range(side.size)])
        for i in range(side.size - 1):
            if vals[i] == 0.0:
                roots.append(float(side[i]))
            elif vals[i] * vals[i + 1] < 0:
                lo, hi, flo = side[i], side[i + 1], vals[i]
                while abs(hi - lo) > xtol:
                    mid = 0.5 * (lo + hi)
                    fm = stat(mid)
                    if fm * flo > 0:
                        lo, flo = mid, fm
                    else:
                        hi = mid
                roots.append(float(0.5 * (lo + hi)))
        if vals[-1] == 0.0:
            roots.append(float(side[-1]))
    return sorted(roots)


# ---------------------------------------------------------------------------
# geodesic variations


@dataclass(frozen=True, eq=False)
class Variation:
    """A geodesic variation f(s, t) = gamma_s(t) through light rays.

    ``df_ds`` gives the Jacobi field J_s(t) and ``df_dt`` the velocity; when
    omitted they are 4th-order central differences with step ``h``.
    """

    metric: MetricSpec
    f: Callable
    df_ds: Optional[Callable] = None
    df_dt: Optional[Callable] = None
    h: float = 1e-4

    def point(self, s, t):
        return np.asarray(self.f(s, t), dtype=float)

    def jacobi(self, s, t):
        if self.df_ds is not None:
            return np.asarray(self.df_ds(s, t), dtype=float)
        h = self.h
        return (-self.point(s + 2 * h, t) + 8 * self.point(s + h, t)
                - 8 * self.point(s - h, t) + self.point(s - 2 * h, t)) / (12 * h)

    def velocity(self, s, t):
        if self.df_dt is not None:
            return np.asarray(self.df_dt(s, t), dtype=float)
        h = self.h
        return (-self.point(s, t + 2 * h) + 8 * self.point(s, t + h)
                - 8 * self.point(s, t - h) + self.point(s, t - 2 * h)) / (12 * h)

    @classmethod
    def from_lift(cls, metric: MetricSpec, base: Callable, direction: Callable,
                  offset: Optional[Callable] = None, rtol=1e-12, atol=1e-12, h=1e-4):
        """f(s, t) = exp_{base(s)}((t - offset(s)) direction(s)).

        With ``direction`` proportional to base' this lifts a null curve to a
        celestial curve whose root function is t(s) = offset(s).
        """
        from .geometry import geodesic_state

        off = offset if offset is not None else (lambda s: 0.0)

        def state(s, t):
            return geodesic_state(metric, base(s), direction(s), t - off(s), rtol=rtol, atol=atol)

        return cls(metric, lambda s, t: state(s, t)[0], None, lambda s, t: state(s, t)[1], h=h)
