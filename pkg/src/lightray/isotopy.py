"""Parallel-transport Legendrian isotopies, their sign profiles and the causality
classifier, the dual causal-vector test and celestial-curve recovery.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import expm
from scipy.optimize import minimize, minimize_scalar

from .errors import ContinuationLostError, NonRegularCurveError
from .geometry import (CausalCharacter, CurveSample, MetricSpec, TangentVector, causal_character,
                       transport_matrices)
from .jacobi import Variation
from .rays import null_future_vectors, ray_through, sphere_points

SIGN_TOL = 1e-9
DEFAULT_S_NODES = 201


def default_sphere_samples(m):
    return 64 if m == 3 else 256


# ---------------------------------------------------------------------------
# isotopy fields and profiles


@dataclass(frozen=True, eq=False)
class IsotopyField:
    """Sampled F^mu: ``directions[j, i]`` is the transport of u^i to mu(s_grid[j])."""

    metric: MetricSpec
    curve: CurveSample
    s_grid: np.ndarray
    units: np.ndarray
    transport: np.ndarray
    directions: np.ndarray

    @property
    def n(self):
        return self.units.shape[0]

    def ray(self, i, j):
        """The induced light ray gamma_[u^i_s] at s = s_grid[j], with its mark at mu(s_j)."""
        return ray_through(self.metric, self.curve.position(self.s_grid[j]), self.directions[j, i])[0]


def isotopy_from_curve(metric: MetricSpec, curve: CurveSample, n=None, s_grid=None) -> IsotopyField:
    m = metric.dim
    n = default_sphere_samples(m) if n is None else int(n)
    if n < 4:
        raise ValueError("need at least 4 sphere samples")
    if s_grid is None:
        s_grid = np.linspace(curve.interval[0], curve.interval[1], DEFAULT_S_NODES)
    s_grid = np.asarray(s_grid, dtype=float)
    units = sphere_points(m, n)
    u0 = null_future_vectors(metric, curve.position(s_grid[0]), units)   # (n, m)
    P = transport_matrices(metric, curve, s_grid)                         # (len, m, m)
    directions = np.einsum("jab,ib->jia", P, u0)
    return IsotopyField(metric, curve, s_grid, units, P, directions)


@dataclass(frozen=True, eq=False)
class IsotopyProfile:
    """values[i, j] = g(mu'(s_j), u^i_{s_j})."""

    values: np.ndarray
    s_grid: np.ndarray
    units: np.ndarray


def _profile_values(metric, curve, s_grid, directions):
    out = np.empty((directions.shape[1], s_grid.size))
    for j, s in enumerate(s_grid):
        g = metric.g(curve.position(s))
        out[:, j] = directions[j] @ (g @ curve.velocity(s))
    return out


def sign_profile(field: IsotopyField) -> IsotopyProfile:
    vals = _profile_values(field.metric, field.curve, field.s_grid, field.directions)
    if not np.all(np.isfinite(vals)):
        raise ValueError("profile has non-finite entries")
    return IsotopyProfile(vals, field.s_grid, field.units)


class IsotopySign(str, enum.Enum):
    NON_NEGATIVE = "NonNegative"
    NON_POSITIVE = "NonPositive"
    MIXED = "Mixed"
    DEGENERATE = "Degenerate"


class Verdict(str, enum.Enum):
    CAUSAL_PAST = "causal-past"
    CAUSAL_FUTURE = "causal-future"
    NOT_CAUSAL = "not-causal"
    CONSTANT_CURVE = "constant-curve"


VERDICT = {
    IsotopySign.NON_NEGATIVE: Verdict.CAUSAL_PAST,
    IsotopySign.NON_POSITIVE: Verdict.CAUSAL_FUTURE,
    IsotopySign.MIXED: Verdict.NOT_CAUSAL,
    IsotopySign.DEGENERATE: Verdict.CONSTANT_CURVE,
}

@dataclass(frozen=True)
class CausalClass:
    """Sign class of a profile, its causal verdict and the per-sign s-intervals.

    ``intervals`` lists ``(label, s_start, s_end)`` with label one of
    "+", "-", "0", "mixed" for maximal runs of grid columns.
    """

    sign: IsotopySign
    verdict: Verdict
    intervals: tuple = field(default_factory=tuple)
    band: float = 0.0

    def to_dict(self):
        return {"class": self.sign.value, "verdict": self.verdict.value, "band": self.band,
                "intervals": [[lab, a, b] for lab, a, b in self.intervals]}


def _column_labels(vals, band):
    lo, hi = vals.min(axis=0), vals.max(axis=0)
    labels = []
    for a, b in zip(lo, hi):
        if a >= -band and b <= band:
            labels.append("0")
        elif a >= -band:
            labels.append("+")
        elif b <= band:
            labels.append("-")
        else:
            labels.append("mixed")
    return labels


def _sweep(labels, s):
    runs = []
    start = 0
    for j in range(1, len(labels) + 1):
        if j == len(labels) or labels[j] != labels[start]:
            runs.append((labels[start], float(s[start]), float(s[j - 1])))
            start = j
    return tuple(runs)


def classify_profile(profile: IsotopyProfile, tol=SIGN_TOL, window=None) -> CausalClass:
    """Non-negative, non-positive, mixed or degenerate, with band tol * max|profile|.

    Entries inside the band are neutral. ``window=(a, b)`` restricts the
    classification to grid columns with a <= s <= b while the band stays the
    one of the whole profile.
    """
    vals, s = profile.values, profile.s_grid
    peak = float(np.max(np.abs(vals))) if vals.size else 0.0
    band = tol * peak
    if window is not None:
        keep = (s >= window[0]) & (s <= window[1])
        if not np.any(keep):
            raise ValueError(f"window {window} contains no grid column")
        vals, s = vals[:, keep], s[keep]
    if peak <= tol:
        sign = IsotopySign.DEGENERATE
        labels = ["0"] * s.size
    else:
        labels = _column_labels(vals, band)
        lo, hi = vals.min(), vals.max()
        if lo >= -band and hi <= band:
            sign = IsotopySign.DEGENERATE
        elif lo >= -band:
            sign = IsotopySign.NON_NEGATIVE
        elif hi <= band:
            sign = IsotopySign.NON_POSITIVE
        else:
            sign = IsotopySign.MIXED
    return CausalClass(sign, VERDICT[sign], _sweep(labels, s), band)


def pointwise_verdict(metric: MetricSpec, curve: CurveSample, s_grid, tol=1e-9) -> Verdict:
    """Verdict from causal_character of mu'(s) on the grid, zero vectors ignored."""
    chars = [causal_character(metric, TangentVector(curve.position(s), curve.velocity(s)), tol=tol)
             for s in s_grid]
    moving = [c for c in chars if c is not CausalCharacter.ZERO]
    if not moving:
        return Verdict.CONSTANT_CURVE
    if all(c.is_past for c in moving):
        return Verdict.CAUSAL_PAST
    if all(c.is_future for c in moving):
        return Verdict.CAUSAL_FUTURE
    return Verdict.NOT_CAUSAL


def classify_curve(metric: MetricSpec, curve: CurveSample, n=None, s_grid=None, tol=SIGN_TOL):
    """isotopy_from_curve -> sign_profile -> classify_profile."""
    profile = sign_profile(isotopy_from_curve(metric, curve, n=n, s_grid=s_grid))
    return classify_profile(profile, tol=tol), profile


# ---------------------------------------------------------------------------
# reparametrizations of the sphere


def reparam_invariance_check(field: IsotopyField, reparametrization: Callable, tol=SIGN_TOL) -> bool:
    """Compare the sign class of F with that of F~(x, s) = F(phi_s(x), s).

    ``reparametrization(s, units)`` returns the images phi_s(units) as unit
    spatial vectors at mu(start).
    """
    metric, curve = field.metric, field.curve
    start = curve.position(field.s_grid[0])
    directions = np.empty_like(field.directions)
    for j, s in enumerate(field.s_grid):
        moved = np.asarray(reparametrization(s, field.units), dtype=float)
        directions[j] = null_future_vectors(metric, start, moved) @ field.transport[j].T
    base = classify_profile(sign_profile(field), tol=tol)
    vals = _profile_values(metric, curve, field.s_grid, directions)
    other = classify_profile(IsotopyProfile(vals, field.s_grid, field.units), tol=tol)
    return base.sign is other.sign


def random_sphere_reparametrization(m: int, rng) -> Callable:
    """A smooth s-dependent family of sphere diffeomorphisms.

    For m = 3: theta -> theta + c(s) + b sin(theta - d) with |b| < 1, which is
    monotone in theta. Otherwise a rotation expm(A0 + s A1) with A0, A1
    antisymmetric.
    """
    if m == 3:
        c0, c1, c2 = rng.uniform(-np.pi, np.pi, 3)
        b = rng.uniform(-0.9, 0.9)
        d = rng.uniform(0, 2 * np.pi)

        def phi(s, units):
            th = np.arctan2(units[:, 1], units[:, 0])
            th = th + c0 + c1 * s + c2 * np.sin(s) + b * np.sin(th - d)
            return np.column_stack([np.cos(th), np.sin(th)])

        return phi
    k = m - 1
    A0 = rng.standard_normal((k, k))
    A1 = rng.standard_normal((k, k))
    A0, A1 = A0 - A0.T, A1 - A1.T

    def rot(s, units):
        return units @ expm(A0 + s * A1).T

    return rot


def rotation_reparametrization(s, units):
    """theta -> theta + s (m = 3)."""
    th = np.arctan2(units[:, 1], units[:, 0]) + s
    return np.column_stack([np.cos(th), np.sin(th)])


# ---------------------------------------------------------------------------
# dual characterization of causal past vectors


@dataclass(frozen=True)
class DualCausality:
    causal_past: bool
    min_value: float
    character: CausalCharacter
    agrees: bool


def vector_dual_causality(metric: MetricSpec, p, v, n=256, tol=SIGN_TOL) -> DualCausality:
    """v is causal past iff g(u, v) >= 0 for every null future u at p.

    The minimum over ``n`` sphere samples is refined by a local search started
    from the best sample. ``agrees`` compares with causal_character(v).
    """
    p = np.asarray(p, float)
    v = np.asarray(v, float)
    if not np.any(v):
        raise ValueError("v must be nonzero")
    m = metric.dim
    E = metric.frame(p)
    g = metric.g(p)
    gv = g @ v
    units = sphere_points(m, n)
    vals = null_future_vectors(metric, p, units) @ gv
    best = int(np.argmin(vals))

    def value(unit):
        return float(E @ np.concatenate([[1.0], unit]) @ gv)

    if m == 3:
        th0 = np.arctan2(units[best, 1], units[best, 0])
        w = 2 * np.pi / n
        res = minimize_scalar(lambda th: value(np.array([np.cos(th), np.sin(th)])),
                              bounds=(th0 - w, th0 + w), method="bounded",
                              options={"xatol": 1e-12})
        refined = float(res.fun)
    else:
        res = minimize(lambda y: value(y / np.linalg.norm(y)), units[best], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 2000})
        refined = float(res.fun)
    lo = min(float(vals[best]), refined)
    scale = float(np.linalg.norm(np.linalg.solve(E, v)))
    past = lo >= -tol * scale
    char = causal_character(metric, TangentVector(p, v), tol=tol)
    return DualCausality(past, lo, char, past == char.is_past)


# ---------------------------------------------------------------------------
# celestial curves


def _frame_reduced(metric, x, J, V):
    E = metric.frame(x)
    w = np.linalg.solve(E, J)
    c = np.linalg.solve(E, V)
    return w[1:] - w[0] * c[1:] / c[0]


@dataclass(frozen=True, eq=False)
class CelestialRecovery:
    """Root function t(s), recovered curve mu(s) = f(s, t(s)) and direction sigma(s)."""

    variation: Variation
    s_nodes: np.ndarray
    t_nodes: np.ndarray
    spline: CubicSpline
    alternates: tuple
    checks: dict

    @property
    def interval(self):
        return float(self.s_nodes[0]), float(self.s_nodes[-1])

    def t(self, s):
        return float(self.spline(s))

    def mu(self, s):
        return self.variation.point(s, self.t(s))

    def mu_velocity(self, s):
        t = self.t(s)
        return self.variation.jacobi(s, t) + float(self.spline(s, 1)) * self.variation.velocity(s, t)

    def sigma(self, s):
        return self.variation.velocity(s, self.t(s))

    def as_curve(self) -> CurveSample:
        return CurveSample(self.interval, self.mu, self.mu_velocity)


def _root_residual(variation, metric):
    def r(s, t):
        x = variation.point(s, t)
        return _frame_reduced(metric, x, variation.jacobi(s, t), variation.velocity(s, t))
    return r


def _newton_t(r, s, t, scale, tol, h=1e-6, iters=30):
    for _ in range(iters):
        rv = r(s, t)
        if np.linalg.norm(rv) <= 1e-3 * tol * scale:
            return t, rv
        dr = (r(s, t + h) - r(s, t - h)) / (2 * h)
        den = float(dr @ dr)
        if den <= (1e-8 * scale) ** 2:
            raise NonRegularCurveError(
                f"d/dt of the reduced Jacobi field vanishes at (s, t) = ({s}, {t}); "
                "the family of rays is not regular there")
        step = -float(rv @ dr) / den
        t += step
        if abs(step) < 1e-14 * max(1.0, abs(t)):
            break
    return t, r(s, t)


def celestial_recover(metric: MetricSpec, variation: Variation, seed, s_range, n_s=DEFAULT_S_NODES,
                      tol=1e-8, t_window=5.0, alt_grid=128) -> CelestialRecovery:
    """Continue the root t(s) of J_s(t) = 0 mod gamma_s'(t) from ``seed = (s0, t0)``.

    Each step predicts linearly from the previous two nodes and corrects with
    Gauss-Newton on the reduced residual, which vanishes where g(J, J) does.
    Other roots at s0 within ``t_window`` of t0 are reported as alternates.
    """
    s0, t0 = float(seed[0]), float(seed[1])
    a, b = float(s_range[0]), float(s_range[1])
    if not a <= s0 <= b:
        raise ValueError("seed parameter outside s_range")
    r = _root_residual(variation, metric)
    scale = max(1.0, float(np.linalg.norm(variation.jacobi(s0, t0))))
    t0, rv = _newton_t(r, s0, t0, scale, tol)
    if np.linalg.norm(rv) > tol * scale:
        raise ContinuationLostError(f"seed ({s0}, {seed[1]}) is not on a root: residual {np.linalg.norm(rv):.3e}")

    grid = np.linspace(a, b, n_s)
    right = np.concatenate([[s0], grid[grid > s0]])
    left = np.concatenate([[s0], grid[grid < s0][::-1]])
    branches = []
    for side in (right, left):
        ts = [t0]
        for k in range(1, side.size):
            pred = ts[-1] if k == 1 else ts[-1] + (ts[-1] - ts[-2]) * (side[k] - side[k - 1]) / (side[k - 1] - side[k - 2])
            t_new, rv = _newton_t(r, side[k], pred, scale, tol)
            if not np.isfinite(t_new) or np.linalg.norm(rv) > tol * scale:
                raise ContinuationLostError(f"lost the root near s = {side[k]} (residual {np.linalg.norm(rv):.3e})")
            ts.append(t_new)
        branches.append(np.array(ts))
    s_nodes = np.concatenate([left[1:][::-1], right])
    t_nodes = np.concatenate([branches[1][1:][::-1], branches[0]])
    spline = CubicSpline(s_nodes, t_nodes) if s_nodes.size > 1 else None

    alternates = []
    cand = np.linspace(t0 - t_window, t0 + t_window, alt_grid)
    norms = np.array([np.linalg.norm(r(s0, t)) for t in cand])
    for i in range(1, cand.size - 1):
        if norms[i] <= norms[i - 1] and norms[i] <= norms[i + 1]:
            try:
                t_alt, rv = _newton_t(r, s0, cand[i], scale, tol)
            except NonRegularCurveError:
                continue
            if np.linalg.norm(rv) <= tol * scale and abs(t_alt - t0) > 1e-6 \
                    and not any(abs(t_alt - q) < 1e-6 for q in alternates):
                alternates.append(float(t_alt))

    rec = CelestialRecovery(variation, s_nodes, t_nodes, spline, tuple(sorted(alternates)), {})
    rec.checks.update(_recovery_checks(metric, rec))
    return rec


def _recovery_checks(metric, rec: CelestialRecovery):
    null, prop, orth = 0.0, 0.0, 0.0
    for s in rec.s_nodes:
        x = rec.mu(s)
        dmu = rec.mu_velocity(s)
        sig = rec.sigma(s)
        E = metric.frame(x)
        cm = np.linalg.solve(E, dmu)
        cs = np.linalg.solve(E, sig)
        null = max(null, abs(metric.inner(x, dmu, dmu)))
        lam = float(cm @ cs) / float(cs @ cs)
        prop = max(prop, float(np.linalg.norm(cm - lam * cs)))
        orth = max(orth, abs(metric.inner(x, rec.variation.jacobi(s, rec.t(s)), sig)))
    return {"null": null, "proportional": prop, "orthogonal": orth}


def classify_celestial_curve(metric: MetricSpec, variation: Variation, seed, s_range, n=None,
                             n_s=DEFAULT_S_NODES, tol=SIGN_TOL, window=None):
    """celestial_recover -> isotopy_from_curve -> sign_profile -> classify_profile.

    Returns ``(causal_class, recovery, profile)``.
    """
    rec = celestial_recover(metric, variation, seed, s_range, n_s=n_s)
    profile = sign_profile(isotopy_from_curve(metric, rec.as_curve(), n=n, s_grid=rec.s_nodes))
    return classify_profile(profile, tol=tol, window=window), rec, profile
