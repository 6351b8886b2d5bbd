"""Future null directions, canonical light rays and the (x, u) chart on the space of rays.

A :class:`LightRay` is stored by its anchor on the local Cauchy surface
C = {x^1 = level} and the full unit spatial vector (u^2, ..., u^m) of its
direction in the orthonormal frame, with the implicit u^1 = 1. Its affine
parameter is fixed by gamma(0) = anchor and gamma'(0) = E_1 + sum_j u^j E_j.
The hemisphere and angle charts are views on that storage.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _ode
from .errors import ChartError, RayError
from .geometry import (CausalCharacter, CurveSample, MetricSpec, TangentVector, as_event,
                       causal_character, geodesic_flow, geodesic_rhs, geodesic_state)

HORIZON = 1e3
GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


@dataclass(frozen=True, eq=False)
class NullDirection:
    base: np.ndarray
    unit: np.ndarray

    def __post_init__(self):
        unit = np.asarray(self.unit, dtype=float)
        n = np.linalg.norm(unit)
        if abs(n - 1.0) > 1e-12:
            raise ValueError(f"null direction must be a unit spatial vector, |u| = {n}")
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))

    def vector(self, metric: MetricSpec) -> np.ndarray:
        return metric.frame(self.base) @ np.concatenate([[1.0], self.unit])


@dataclass(frozen=True, eq=False)
class LightRay:
    metric: MetricSpec
    anchor: np.ndarray
    direction: np.ndarray
    level: float = 0.0
    mark: Optional[float] = None  # affine parameter of the event the ray was built from

    @property
    def dim(self):
        return self.metric.dim

    @property
    def velocity(self) -> np.ndarray:
        """gamma'(0) in coordinates."""
        return self.metric.frame(self.anchor) @ np.concatenate([[1.0], self.direction])

    def state(self, t, rtol=_ode.RTOL, atol=_ode.ATOL):
        """(gamma(t), gamma'(t))."""
        if t == 0:
            return self.anchor.copy(), self.velocity
        return geodesic_state(self.metric, self.anchor, self.velocity, t, rtol=rtol, atol=atol)

    def point(self, t):
        return self.state(t)[0]

    def geodesic(self, t_span, rtol=_ode.RTOL, atol=_ode.ATOL) -> CurveSample:
        return geodesic_flow(self.metric, self.anchor, self.velocity, t_span, rtol=rtol, atol=atol)

    def same_as(self, other: "LightRay", tol=1e-8) -> bool:
        return (np.max(np.abs(self.anchor - other.anchor)) < tol
                and np.max(np.abs(self.direction - other.direction)) < tol)


@dataclass(frozen=True, eq=False)
class RayChart:
    """Chart on the rays crossing C = {x^1 = level}.

    ``kind="hemisphere"`` is the chart (x^2..x^m, u^3..u^m) on rays with
    ``sign * u^2 > 0``; ``kind="angle"`` (m = 3 only) uses (x^2, x^3, theta) with
    u = (cos theta, sin theta). ``bounds`` optionally restricts the anchors.
    """

    metric: MetricSpec
    kind: str = "hemisphere"
    level: float = 0.0
    sign: int = 1
    bounds: Optional[tuple] = None

    def __post_init__(self):
        if self.kind not in ("hemisphere", "angle"):
            raise ValueError(f"unknown chart kind {self.kind!r}")
        if self.kind == "angle" and self.metric.dim != 3:
            raise ChartError("the angle chart exists only for m = 3")
        if self.sign not in (1, -1):
            raise ValueError("hemisphere sign must be +1 or -1")

    @property
    def dim(self):
        return 2 * self.metric.dim - 3

    def check_anchor(self, x):
        if self.bounds is None:
            return
        lo, hi = np.asarray(self.bounds[0], float), np.asarray(self.bounds[1], float)
        if np.any(x < lo) or np.any(x > hi):
            raise ChartError(f"anchor coordinates {x} outside the chart domain")

    # sphere parametrization -------------------------------------------------

    def unit_from_u(self, u) -> np.ndarray:
        u = np.atleast_1d(np.asarray(u, dtype=float))
        if self.kind == "angle":
            return np.array([np.cos(u[0]), np.sin(u[0])])
        rest = float(u @ u)
        if rest >= 1.0:
            raise ChartError(f"hemisphere coordinates {u} leave the open unit ball")
        return np.concatenate([[self.sign * np.sqrt(1.0 - rest)], u])

    def u_from_unit(self, unit) -> np.ndarray:
        if self.kind == "angle":
            return np.array([np.arctan2(unit[1], unit[0])])
        if self.sign * unit[0] <= 1e-12:
            raise ChartError("ray lies outside the hemisphere of this chart (u^2 has the wrong sign)")
        return np.asarray(unit[1:], dtype=float).copy()

    def unit_derivative(self, u, udot) -> np.ndarray:
        """d/ds of the unit spatial direction along u + s*udot."""
        u = np.atleast_1d(np.asarray(u, float))
        udot = np.atleast_1d(np.asarray(udot, float))
        if self.kind == "angle":
            return np.array([-np.sin(u[0]), np.cos(u[0])]) * udot[0]
        unit = self.unit_from_u(u)
        return np.concatenate([[-(u @ udot) / unit[0]], udot])

    def check_cauchy(self, probes, tol=0.0) -> bool:
        """True when the induced metric on {x^1 = level} is positive definite at every probe."""
        for x in probes:
            p = np.concatenate([[self.level], np.asarray(x, float)])
            if np.linalg.eigvalsh(self.metric.g(p)[1:, 1:]).min() <= tol:
                return False
        return True


# ---------------------------------------------------------------------------
# sphere sampling


def sphere_points(m: int, n: int) -> np.ndarray:
    """``n`` deterministic unit vectors in R^(m-1).

    Equispaced angles for m = 3, a Fibonacci sphere for m = 4, normalized
    Gaussian draws from a fixed seed beyond that.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    k = np.arange(n)
    if m == 3:
        th = 2 * np.pi * k / n
        return np.column_stack([np.cos(th), np.sin(th)])
    if m == 4:
        z = 1.0 - (2 * k + 1) / n
        r = np.sqrt(1.0 - z * z)
        phi = k * GOLDEN_ANGLE
        return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    pts = np.random.default_rng(0).standard_normal((n, m - 1))
    return pts / np.linalg.norm(pts, axis=1, keepdims=True)


def null_future_vectors(metric: MetricSpec, p, units) -> np.ndarray:
    """Rows E_1 + sum_j n^j E_j for each unit spatial vector n."""
    E = metric.frame(p)
    units = np.atleast_2d(units)
    return np.column_stack([np.ones(len(units)), units]) @ E.T


# ---------------------------------------------------------------------------
# canonicalization


def _crossing(metric, p, xi, level, t_end, rtol, atol):
    m = metric.dim

    def hit(t, y):
        return y[0] - level

    hit.terminal = True
    sol = _ode.integrate(geodesic_rhs(metric), 0.0, t_end, np.concatenate([p, xi]),
                         rtol=rtol, atol=atol, events=hit)
    if sol.t_events is None or len(sol.t_events[0]) == 0:
        return None
    if metric.domain is not None:
        for x in sol.y[:m].T:
            if not metric.in_domain(x):
                return None
    return float(sol.t_events[0][0]), sol.y_events[0][0].copy()


def ray_through(metric: MetricSpec, p, xi, horizon=HORIZON, level=0.0,
                rtol=_ode.RTOL, atol=_ode.ATOL):
    """Canonical ray through ``p`` with initial velocity ``xi``.

    Returns ``(ray, t_p)`` where ``t_p`` is the canonical affine parameter at
    which the ray passes through ``p``.
    """
    m = metric.dim
    p = as_event(p, m)
    xi = np.asarray(xi.comps if isinstance(xi, TangentVector) else xi, dtype=float)
    char = causal_character(metric, TangentVector(p, xi))
    if char is not CausalCharacter.NULL_FUTURE:
        raise RayError(f"direction must be null and future pointing, got {char.value}")

    if abs(p[0] - level) <= 1e-14:
        t_cross, y = 0.0, np.concatenate([p, xi])
    else:
        # head towards the surface first, then try the other way
        toward = -1.0 if (p[0] - level) * xi[0] > 0 else 1.0
        found = None
        for direction in (toward, -toward):
            found = _crossing(metric, p, xi, level, direction * horizon, rtol, atol)
            if found is not None:
                break
        if found is None:
            raise RayError(f"ray through {p} does not cross x^1 = {level} within |t| <= {horizon}")
        t_cross, y = found
        # one Newton correction on the crossing parameter
        dt = -(y[0] - level) / y[m]
        if dt != 0.0 and np.isfinite(dt):
            sol = _ode.integrate(geodesic_rhs(metric), 0.0, dt, y, rtol=rtol, atol=atol)
            y = sol.y[:, -1]
            t_cross += dt

    anchor, vel = y[:m].copy(), y[m:].copy()
    anchor[0] = level
    c = metric.frame_components(anchor, vel)
    if c[0] <= 0:
        raise RayError("canonicalized velocity is not future pointing")
    unit = c[1:] / c[0]
    unit /= np.linalg.norm(unit)
    ray = LightRay(metric, anchor, unit, level=level, mark=-t_cross * c[0])
    return ray, -t_cross * c[0]


def ray_from_event_direction(metric: MetricSpec, p, xi, horizon=HORIZON, level=0.0) -> LightRay:
    """The canonical ray through ``p`` along the null future vector ``xi``."""
    return ray_through(metric, p, xi, horizon=horizon, level=level)[0]


def ray_coords(chart: RayChart, ray: LightRay):
    """Chart coordinates (x, u) of ``ray``."""
    if abs(ray.level - chart.level) > 1e-12:
        raise ChartError("ray is anchored on a different Cauchy surface than the chart")
    x = ray.anchor[1:].copy()
    chart.check_anchor(x)
    return x, chart.u_from_unit(ray.direction)


def ray_from_coords(chart: RayChart, x, u) -> LightRay:
    x = np.asarray(x, dtype=float)
    chart.check_anchor(x)
    anchor = np.concatenate([[chart.level], x])
    return LightRay(chart.metric, anchor, chart.unit_from_u(u), level=chart.level)


def sky_sample(metric: MetricSpec, p, n: int, level=0.0, threads: int = 1) -> list:
    """``n`` rays through ``p`` with distinct sampled directions.

    Each ray's ``mark`` is the affine parameter at which it passes through ``p``.
    """
    p = as_event(p, metric.dim)
    xis = null_future_vectors(metric, p, sphere_points(metric.dim, n))

    def build(xi):
        return ray_through(metric, p, xi, level=level)[0]

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(build, xis))
    return [build(xi) for xi in xis]
