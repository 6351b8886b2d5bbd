"""Metric evaluation, connection and curvature, geodesics, parallel transport
and pointwise causal classification.

Index conventions (all arrays in the coordinate basis):

* ``dg[k, i, j]``        = d_k g_ij
* ``d2g[k, l, i, j]``    = d_k d_l g_ij
* ``gamma[k, i, j]``     = Gamma^k_ij
* ``riem[a, b, c, d]``   = R^a_bcd with R(X, Y)Z = R^a_bcd Z^b X^c Y^d, i.e.
  R(X, Y) = [nabla_X, nabla_Y] - nabla_[X,Y]
* ``cotton[i, j, k]``    = C_ijk
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import _ode
from .errors import DimensionError, DomainError, FrameError, SingularMetricError

H_GAMMA = 1e-5   # first-derivative step
H_RIEMANN = 1e-4  # second-derivative step
H_COTTON = 1e-3   # step of the 4th-order stencil applied to the Ricci tensor
NULL_TOL = 1e-9

Array = np.ndarray


@dataclass(frozen=True, eq=False)
class MetricSpec:
    """An analytic Lorentzian metric on a single coordinate chart.

    ``components(p)`` returns the symmetric matrix g_ij at ``p``. The optional
    suppliers provide closed forms; anything missing falls back to central
    differences. The coordinate x^1 (index 0) is assumed to be a time function
    whose increase defines the future, which is what the default frame uses.
    """

    dim: int
    components: Callable[[Array], Array]
    dg: Optional[Callable[[Array], Array]] = None
    d2g: Optional[Callable[[Array], Array]] = None
    christoffel_fn: Optional[Callable[[Array], Array]] = None
    riemann_fn: Optional[Callable[[Array], Array]] = None
    frame_fn: Optional[Callable[[Array], Array]] = None
    domain: Optional[Callable[[Array], bool]] = None
    flat: bool = False
    name: str = "metric"

    def __post_init__(self):
        if self.dim < 3:
            raise DimensionError(f"metric dimension must be >= 3, got {self.dim}")

    def g(self, p) -> Array:
        return np.asarray(self.components(np.asarray(p, dtype=float)), dtype=float)

    def inner(self, p, u, v) -> float:
        return float(np.asarray(u) @ self.g(p) @ np.asarray(v))

    def frame(self, p) -> Array:
        """Orthonormal frame at ``p``; column ``a`` holds E_{a+1}."""
        if self.frame_fn is not None:
            return np.asarray(self.frame_fn(np.asarray(p, dtype=float)), dtype=float)
        return gram_schmidt_frame(self.g(p))

    def frame_components(self, p, v) -> Array:
        """Components of ``v`` (coordinate basis, shape (m,) or (m, k)) in the frame at ``p``."""
        return np.linalg.solve(self.frame(p), v)

    def in_domain(self, p) -> bool:
        p = np.asarray(p, dtype=float)
        if not np.all(np.isfinite(p)):
            return False
        return True if self.domain is None else bool(self.domain(p))


@dataclass(frozen=True, eq=False)
class TangentVector:
    base: Array
    comps: Array

    def __post_init__(self):
        object.__setattr__(self, "base", np.asarray(self.base, dtype=float))
        object.__setattr__(self, "comps", np.asarray(self.comps, dtype=float))
        if self.base.shape != self.comps.shape:
            raise DimensionError("tangent vector and base event dimensions differ")

    def __neg__(self):
        return TangentVector(self.base, -self.comps)


@dataclass(frozen=True, eq=False)
class CurveSample:
    """A parametrized curve on ``interval`` with position and velocity maps."""

    interval: tuple
    position: Callable[[float], Array]
    velocity: Callable[[float], Array]

    @classmethod
    def from_position(cls, interval, position, h=1e-3):
        """Build a curve whose velocity is a 4th-order central difference of ``position``."""

        def velocity(s):
            return (-position(s + 2 * h) + 8 * position(s + h)
                    - 8 * position(s - h) + position(s - 2 * h)) / (12 * h)

        return cls(tuple(interval), position, velocity)


def as_event(coords, dim=None) -> Array:
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or (dim is not None and p.size != dim):
        raise DimensionError(f"event must have {dim} coordinates, got shape {p.shape}")
    if not np.all(np.isfinite(p)):
        raise ValueError("event coordinates must be finite")
    return p


def gram_schmidt_frame(g: Array) -> Array:
    """Lorentzian Gram-Schmidt on the coordinate basis, E_1 along +d/dx^1."""
    m = g.shape[0]
    eta = np.ones(m)
    eta[0] = -1.0
    E = np.zeros((m, m))
    for a in range(m):
        e = np.zeros(m)
        e[a] = 1.0
        for b in range(a):
            e = e - eta[b] * (e @ g @ E[:, b]) * E[:, b]
        n2 = e @ g @ e
        if not np.isfinite(n2) or n2 * eta[a] <= 0:
            raise FrameError(f"coordinate basis vector {a} has the wrong causal type for signature (-,+,...,+)")
        E[:, a] = e / np.sqrt(abs(n2))
    return E


def validate_metric(metric: MetricSpec, probes, tol=1e-10):
    """Check symmetry, signature and frame orthonormality at each probe.

    Returns the largest frame orthonormality residual.
    """
    m = metric.dim
    eta = np.diag([-1.0] + [1.0] * (m - 1))
    worst = 0.0
    for p in probes:
        g = metric.g(p)
        if g.shape != (m, m):
            raise DimensionError(f"metric components have shape {g.shape}, expected {(m, m)}")
        if np.max(np.abs(g - g.T)) > tol * max(1.0, np.max(np.abs(g))):
            raise ValueError(f"metric not symmetric at {p}")
        eig = np.linalg.eigvalsh(g)
        if np.sum(eig < 0) != 1:
            raise ValueError(f"metric signature is not (-,+,...,+) at {p}")
        E = metric.frame(p)
        worst = max(worst, float(np.max(np.abs(E.T @ g @ E - eta))))
        if E[0, 0] <= 0:
            raise FrameError(f"E_1 is not future pointing at {p}")
    return worst


# ---------------------------------------------------------------------------
# derivatives and curvature


def _inverse(g):
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise SingularMetricError(f"metric matrix is singular: {exc}") from exc
    if not np.all(np.isfinite(ginv)) or np.linalg.cond(g) > 1e14:
        raise SingularMetricError("metric matrix is numerically singular")
    return ginv


def metric_derivatives(metric: MetricSpec, p) -> Array:
    """d_k g_ij, from the closed form when available, else central differences."""
    p = np.asarray(p, dtype=float)
    if metric.dg is not None:
        return np.asarray(metric.dg(p), dtype=float)
    m = metric.dim
    dg = np.empty((m, m, m))
    for k in range(m):
        step = np.zeros(m)
        step[k] = H_GAMMA
        dg[k] = (metric.g(p + step) - metric.g(p - step)) / (2 * H_GAMMA)
    return dg


def _christoffel_from(ginv, dg):
    # Gamma_{l i j} = 1/2 (d_i g_lj + d_j g_li - d_l g_ij)
    lowered = 0.5 * (np.transpose(dg, (1, 0, 2)) + np.transpose(dg, (1, 2, 0)) - dg)
    return np.einsum("kl,lij->kij", ginv, lowered), lowered


def christoffel(metric: MetricSpec, p) -> Array:
    """Christoffel symbols Gamma^k_ij at ``p``."""
    p = np.asarray(p, dtype=float)
    m = metric.dim
    if metric.flat:
        return np.zeros((m, m, m))
    if metric.christoffel_fn is not None:
        return np.asarray(metric.christoffel_fn(p), dtype=float)
    ginv = _inverse(metric.g(p))
    return _christoffel_from(ginv, metric_derivatives(metric, p))[0]


def _riemann_from(gam, dgam):
    # dgam[c, a, d, b] = d_c Gamma^a_db
    riem = np.einsum("cadb->abcd", dgam) - np.einsum("dacb->abcd", dgam)
    riem += np.einsum("ace,edb->abcd", gam, gam) - np.einsum("ade,ecb->abcd", gam, gam)
    return riem


def riemann(metric: MetricSpec, p) -> Array:
    """Riemann tensor R^a_bcd at ``p``.

    Uses the closed-form supplier, else closed-form second metric derivatives,
    else central differences of the Christoffel symbols with step ``H_RIEMANN``.
    """
    p = np.asarray(p, dtype=float)
    m = metric.dim
    if metric.flat:
        return np.zeros((m, m, m, m))
    if metric.riemann_fn is not None:
        return np.asarray(metric.riemann_fn(p), dtype=float)
    if metric.dg is not None and metric.d2g is not None:
        g = metric.g(p)
        ginv = _inverse(g)
        dg = np.asarray(metric.dg(p), dtype=float)
        d2g = np.asarray(metric.d2g(p), dtype=float)
        gam, lowered = _christoffel_from(ginv, dg)
        # d_c Gamma_{l i j} and d_c g^{ae}
        dlow = 0.5 * (np.einsum("cilj->clij", d2g) + np.einsum("cjli->clij", d2g) - d2g)
        dginv = -np.einsum("ap,cpq,qe->cae", ginv, dg, ginv)
        dgam = np.einsum("cae,eij->caij", dginv, lowered) + np.einsum("ae,ceij->caij", ginv, dlow)
        return _riemann_from(gam, dgam)
    gam = christoffel(metric, p)
    dgam = np.empty((m, m, m, m))
    for c in range(m):
        step = np.zeros(m)
        step[c] = H_RIEMANN
        dgam[c] = (christoffel(metric, p + step) - christoffel(metric, p - step)) / (2 * H_RIEMANN)
    return _riemann_from(gam, dgam)


def ricci(metric: MetricSpec, p) -> Array:
    """Ricci tensor R_bd = R^a_bad."""
    return np.einsum("abad->bd", riemann(metric, p))


def scalar_curvature(metric: MetricSpec, p) -> float:
    return float(np.einsum("bd,bd->", _inverse(metric.g(p)), ricci(metric, p)))


def lowered_riemann(metric: MetricSpec, p) -> Array:
    return np.einsum("ae,ebcd->abcd", metric.g(p), riemann(metric, p))


def _stencil4(fn, p, k, h):
    step = np.zeros_like(p)
    step[k] = h
    return (-fn(p + 2 * step) + 8 * fn(p + step) - 8 * fn(p - step) + fn(p - 2 * step)) / (12 * h)


def cotton_tensor(metric: MetricSpec, p, h=H_COTTON) -> Array:
    """Cotton tensor C_ijk = nabla_k R_ij - nabla_j R_ik + (nabla_j R g_ik - nabla_k R g_ij)/4.

    Only defined for three-dimensional metrics. Derivatives of the Ricci tensor
    and scalar curvature use a 4th-order central stencil of step ``h``.
    """
    if metric.dim != 3:
        raise DimensionError(f"the Cotton tensor needs a 3-dimensional metric, got {metric.dim}")
    p = np.asarray(p, dtype=float)
    m = 3
    g = metric.g(p)
    ric = ricci(metric, p)
    gam = christoffel(metric, p)

    def ric_and_scalar(q):
        r = ricci(metric, q)
        return np.concatenate([r.ravel(), [np.einsum("bd,bd->", _inverse(metric.g(q)), r)]])

    d = np.array([_stencil4(ric_and_scalar, p, k, h) for k in range(m)])
    d_ric = d[:, :9].reshape(m, m, m)   # d_k R_ij
    d_scal = d[:, 9]
    nabla = (d_ric - np.einsum("lki,lj->kij", gam, ric) - np.einsum("lkj,il->kij", gam, ric))
    cot = (np.einsum("kij->ijk", nabla) - np.einsum("jik->ijk", nabla)
           + 0.25 * (np.einsum("j,ik->ijk", d_scal, g) - np.einsum("k,ij->ijk", d_scal, g)))
    return cot


# ---------------------------------------------------------------------------
# geodesics and transport


def geodesic_rhs(metric: MetricSpec):
    m = metric.dim

    def rhs(t, y):
        x, v = y[:m], y[m:]
        gam = christoffel(metric, x)
        return np.concatenate([v, -np.einsum("kij,i,j->k", gam, v, v)])

    return rhs


def _check_domain(metric, xs):
    if metric.domain is None:
        return
    for x in xs:
        if not metric.in_domain(x):
            raise DomainError(f"trajectory left the domain of {metric.name} at {x}")


def geodesic_flow(metric: MetricSpec, p, xi, t_span, rtol=_ode.RTOL, atol=_ode.ATOL) -> CurveSample:
    """Affinely parametrized geodesic with gamma(0) = p, gamma'(0) = xi.

    ``t_span`` is an interval containing 0; the result evaluates anywhere in it.
    """
    p = as_event(p, metric.dim)
    xi = np.asarray(xi.comps if isinstance(xi, TangentVector) else xi, dtype=float)
    if not np.any(xi):
        raise ValueError("initial velocity must be nonzero")
    a, b = float(t_span[0]), float(t_span[1])
    if not a <= 0.0 <= b:
        raise ValueError("t_span must contain 0")
    m = metric.dim
    y0 = np.concatenate([p, xi])
    rhs = geodesic_rhs(metric)
    fwd = _ode.integrate(rhs, 0.0, b, y0, rtol=rtol, atol=atol, dense_output=True)
    bwd = _ode.integrate(rhs, 0.0, a, y0, rtol=rtol, atol=atol, dense_output=True)
    _check_domain(metric, fwd.y[:m].T)
    _check_domain(metric, bwd.y[:m].T)

    def state(t):
        return fwd.sol(t) if t >= 0 else bwd.sol(t)

    return CurveSample((a, b), lambda t: state(t)[:m], lambda t: state(t)[m:])


def geodesic_state(metric: MetricSpec, p, xi, t, rtol=_ode.RTOL, atol=_ode.ATOL):
    """Position and velocity at parameter ``t`` of the geodesic through (p, xi)."""
    m = metric.dim
    y0 = np.concatenate([np.asarray(p, float), np.asarray(xi, float)])
    sol = _ode.integrate(geodesic_rhs(metric), 0.0, float(t), y0, rtol=rtol, atol=atol)
    _check_domain(metric, sol.y[:m].T)
    y = sol.y[:, -1]
    return y[:m].copy(), y[m:].copy()


def transport_matrices(metric: MetricSpec, curve: CurveSample, s_grid,
                       rtol=_ode.RTOL, atol=_ode.ATOL) -> Array:
    """Parallel propagators along ``curve``.

    ``P[j]`` maps vectors at curve(s_grid[0]) to curve(s_grid[j]).
    """
    s_grid = np.asarray(s_grid, dtype=float)
    m = metric.dim
    if metric.flat:
        return np.repeat(np.eye(m)[None], s_grid.size, axis=0)

    def rhs(s, y):
        P = y.reshape(m, m)
        gam = christoffel(metric, curve.position(s))
        return -np.einsum("kij,i,jl->kl", gam, curve.velocity(s), P).ravel()

    sol = _ode.integrate(rhs, s_grid[0], s_grid[-1], np.eye(m).ravel(), rtol=rtol, atol=atol,
                         t_eval=s_grid)
    return sol.y.T.reshape(s_grid.size, m, m)


def parallel_transport(metric: MetricSpec, curve: CurveSample, u0, s,
                       rtol=_ode.RTOL, atol=_ode.ATOL) -> TangentVector:
    """Transport ``u0`` (based at the curve's start) along the curve to parameter ``s``."""
    u = np.asarray(u0.comps if isinstance(u0, TangentVector) else u0, dtype=float)
    start = curve.interval[0]
    P = transport_matrices(metric, curve, [start, s], rtol=rtol, atol=atol)[-1]
    return TangentVector(curve.position(s), P @ u)


# ---------------------------------------------------------------------------
# causal character


class CausalCharacter(str, enum.Enum):
    ZERO = "zero"
    SPACELIKE = "spacelike"
    NULL_FUTURE = "null-future"
    NULL_PAST = "null-past"
    TIMELIKE_FUTURE = "timelike-future"
    TIMELIKE_PAST = "timelike-past"

    @property
    def is_past(self):
        return self in (CausalCharacter.NULL_PAST, CausalCharacter.TIMELIKE_PAST)

    @property
    def is_future(self):
        return self in (CausalCharacter.NULL_FUTURE, CausalCharacter.TIMELIKE_FUTURE)


def causal_character(metric: MetricSpec, v: TangentVector, tol=NULL_TOL, zero_tol=1e-14) -> CausalCharacter:
    """Classify ``v`` by the sign of g(v, v) and its time orientation against E_1.

    ``v`` counts as null when |g(v,v)| < tol * max(1, |v|^2) with |v| the
    Euclidean norm of its frame components.
    """
    E = metric.frame(v.base)
    c = np.linalg.solve(E, v.comps)
    norm2 = float(c @ c)
    if norm2 <= zero_tol ** 2:
        return CausalCharacter.ZERO
    g = metric.g(v.base)
    gvv = float(v.comps @ g @ v.comps)
    if gvv > 0 and abs(gvv) >= tol * max(1.0, norm2):
        return CausalCharacter.SPACELIKE
    future = float(v.comps @ g @ E[:, 0]) < 0
    if abs(gvv) < tol * max(1.0, norm2):
        return CausalCharacter.NULL_FUTURE if future else CausalCharacter.NULL_PAST
    return CausalCharacter.TIMELIKE_FUTURE if future else CausalCharacter.TIMELIKE_PAST
