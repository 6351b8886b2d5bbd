"""Closed-form metrics, curves and variations with their exact oracles."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError, DimensionError, DomainError
from .geometry import MetricSpec


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    metric: MetricSpec
    oracles: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# Minkowski


def make_minkowski(m: int = 3) -> CatalogEntry:
    if m < 3:
        raise DimensionError(f"Minkowski space-time needs m >= 3, got {m}")
    eta = np.diag([-1.0] + [1.0] * (m - 1))
    metric = MetricSpec(
        dim=m,
        components=lambda p: eta,
        dg=lambda p: np.zeros((m, m, m)),
        d2g=lambda p: np.zeros((m, m, m, m)),
        frame_fn=lambda p: np.eye(m),
        flat=True,
        name=f"minkowski-{m}",
    )
    oracles = {
        "geodesic": lambda p, xi, t: np.asarray(p, float) + t * np.asarray(xi, float),
        "jacobi": lambda J0, Jp0, t: np.asarray(J0, float) + t * np.asarray(Jp0, float),
        "conjugate": [],
    }
    if m == 3:
        oracles["contact"] = exact_mink3_contact
    return CatalogEntry(metric.name, metric, oracles, {"m": m})


def exact_mink3_contact(theta, comps) -> float:
    """alpha = cos(theta) dx + sin(theta) dy on tangent components (dx, dy, dtheta)."""
    dx, dy, _ = comps
    return float(np.cos(theta) * dx + np.sin(theta) * dy)


# ---------------------------------------------------------------------------
# perturbed Minkowski g_eps


def _bump_exp():
    def f(t):
        return np.exp(-1.0 / t) if t > 0 else 0.0

    def f1(t):
        return np.exp(-1.0 / t) / t**2 if t > 0 else 0.0

    def f2(t):
        return np.exp(-1.0 / t) * (1.0 / t**4 - 2.0 / t**3) if t > 0 else 0.0

    def f_mp(t):
        import mpmath
        return mpmath.exp(-1 / t) if t > 0 else mpmath.mpf(0)

    return f, f1, f2, f_mp


def _bump_poly4():
    def f_mp(t):
        import mpmath
        return mpmath.mpf(t) ** 4 if t > 0 else mpmath.mpf(0)

    return (lambda t: t**4 if t > 0 else 0.0,
            lambda t: 4 * t**3 if t > 0 else 0.0,
            lambda t: 12 * t**2 if t > 0 else 0.0,
            f_mp)


BUMPS = {"exp": _bump_exp, "poly4": _bump_poly4}
_BUMP_PROBES = (-2.0, -1.0, -0.5, -0.1, -1e-3, 0.0)


def make_perturbed_minkowski(eps: float = 0.5, f_spec="exp") -> CatalogEntry:
    """g_eps = -(1+f)dt^2 + 2f dt dx + (1-f)dx^2 + dy^2 on (t, x, y).

    ``f_spec`` is a name from ``BUMPS`` or a tuple ``(f, f', f'')`` of callables,
    optionally with a fourth mpmath-compatible ``f`` for the high-precision oracle.
    The determinant is identically -1 and g_tt < 0, so the metric is Lorentzian
    with d/dt timelike for every t; ``eps`` only fixes the nominal window.
    """
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if isinstance(f_spec, str):
        if f_spec not in BUMPS:
            raise ConfigError(f"unknown bump {f_spec!r}; choose from {sorted(BUMPS)}")
        fns = BUMPS[f_spec]()
        label = f_spec
    else:
        fns = tuple(f_spec) + (None,) * (4 - len(f_spec))
        label = "custom"
    f, f1, f2, f_mp = fns
    for t in _BUMP_PROBES:
        if abs(f(t)) > 0.0:
            raise ConfigError(f"bump must vanish for t <= 0; f({t}) = {f(t)}")

    def components(p):
        ft = f(p[0])
        return np.array([[-(1 + ft), ft, 0.0], [ft, 1 - ft, 0.0], [0.0, 0.0, 1.0]])

    block = np.array([[-1.0, 1.0, 0.0], [1.0, -1.0, 0.0], [0.0, 0.0, 0.0]])

    def dg(p):
        out = np.zeros((3, 3, 3))
        out[0] = f1(p[0]) * block
        return out

    def d2g(p):
        out = np.zeros((3, 3, 3, 3))
        out[0, 0] = f2(p[0]) * block
        return out

    metric = MetricSpec(dim=3, components=components, dg=dg, d2g=d2g, name=f"g_eps({eps},{label})")
    oracles = {}
    if f_mp is not None:
        def mp_components(p):
            import mpmath
            ft = f_mp(p[0])
            return mpmath.matrix([[-(1 + ft), ft, 0], [ft, 1 - ft, 0], [0, 0, 1]])
        oracles["mp_components"] = mp_components
    oracles["probe"] = np.array([eps / 2, 0.0, 0.0])
    return CatalogEntry(metric.name, metric, oracles, {"eps": eps, "f": label})


# ---------------------------------------------------------------------------
# Einstein static R x S^2


CHI_MIN = 0.1


def make_einstein_static() -> CatalogEntry:
    """-dt^2 + dchi^2 + sin^2(chi) dphi^2 on R x S^2, polar chart away from the poles.

    Not part of the worked examples: it supplies a conjugate point at affine
    parameter pi along every null geodesic.
    """

    def components(p):
        return np.diag([-1.0, 1.0, np.sin(p[1]) ** 2])

    def dg(p):
        out = np.zeros((3, 3, 3))
        out[1, 2, 2] = np.sin(2 * p[1])
        return out

    def d2g(p):
        out = np.zeros((3, 3, 3, 3))
        out[1, 1, 2, 2] = 2 * np.cos(2 * p[1])
        return out

    def christoffel_fn(p):
        gam = np.zeros((3, 3, 3))
        s, c = np.sin(p[1]), np.cos(p[1])
        gam[1, 2, 2] = -s * c
        gam[2, 1, 2] = gam[2, 2, 1] = c / s
        return gam

    def frame_fn(p):
        return np.diag([1.0, 1.0, 1.0 / np.sin(p[1])])

    def domain(p):
        return CHI_MIN < p[1] < np.pi - CHI_MIN

    def checked(fn):
        def wrapped(p):
            if not domain(p):
                raise DomainError(f"einstein-static probe {p} is outside chi in ({CHI_MIN}, pi-{CHI_MIN})")
            return fn(p)
        return wrapped

    metric = MetricSpec(dim=3, components=checked(components), dg=dg, d2g=d2g,
                        christoffel_fn=christoffel_fn, frame_fn=checked(frame_fn),
                        domain=domain, name="einstein-static")
    oracles = {"conjugate_first": np.pi, "spatial_scalar_curvature": 2.0}
    return CatalogEntry(metric.name, metric, oracles, {})


# ---------------------------------------------------------------------------
# the worked celestial-curve variation in Minkowski-3


def example_mu_variation(s, tau):
    """f(s, tau) = (tau + s^2/2, s sin s + (1+tau) cos s, -s cos s + (1+tau) sin s)."""
    return np.array([tau + 0.5 * s * s,
                     s * np.sin(s) + (1 + tau) * np.cos(s),
                     -s * np.cos(s) + (1 + tau) * np.sin(s)])


def example_mu_ds(s, tau):
    return np.array([s, s * np.cos(s) - tau * np.sin(s), s * np.sin(s) + tau * np.cos(s)])


def example_mu_dt(s, tau):
    return np.array([1.0, np.cos(s), np.sin(s)])


def example_mu(s):
    return example_mu_variation(s, 0.0)


def example_mu_velocity(s):
    return s * np.array([1.0, np.cos(s), np.sin(s)])


def example_mu_profile(theta, s):
    """Exact g(mu'(s), (1, cos theta, sin theta)) = s (cos(s - theta) - 1)."""
    return s * (np.cos(s - theta) - 1.0)


# ---------------------------------------------------------------------------
# registry


_REGISTRY: dict[str, Callable[..., CatalogEntry]] = {
    "minkowski": make_minkowski,
    "perturbed_minkowski": make_perturbed_minkowski,
    "g_eps": make_perturbed_minkowski,
    "einstein_static": make_einstein_static,
}


def get_entry(name: str, params: Optional[dict] = None) -> CatalogEntry:
    """Look up a catalog metric by name, e.g. ``get_entry("minkowski", {"m": 4})``."""
    try:
        factory = _REGISTRY[name]
    except KeyError:
        raise ConfigError(f"unknown catalog metric {name!r}; known: {sorted(_REGISTRY)}") from None
    try:
        return factory(**(params or {}))
    except TypeError as exc:
        raise ConfigError(f"bad parameters for {name!r}: {exc}") from exc


def catalog_names():
    return sorted(_REGISTRY)
