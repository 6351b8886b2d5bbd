"""Closed-form curves given as coefficient tables over a fixed function basis."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .geometry import CurveSample

# name -> (value, first derivative, second derivative)
BASIS = {
    "1": (lambda s: 1.0, lambda s: 0.0, lambda s: 0.0),
    "s": (lambda s: s, lambda s: 1.0, lambda s: 0.0),
    "s2": (lambda s: s * s, lambda s: 2.0 * s, lambda s: 2.0),
    "sin": (np.sin, np.cos, lambda s: -np.sin(s)),
    "cos": (np.cos, lambda s: -np.sin(s), lambda s: -np.cos(s)),
    "s_sin": (lambda s: s * np.sin(s), lambda s: np.sin(s) + s * np.cos(s),
              lambda s: 2 * np.cos(s) - s * np.sin(s)),
    "s_cos": (lambda s: s * np.cos(s), lambda s: np.cos(s) - s * np.sin(s),
              lambda s: -2 * np.sin(s) - s * np.cos(s)),
}

# sup of |d/ds basis| on [-1, 1], used to bound speeds of random curves
DERIVATIVE_BOUND = {"1": 0.0, "s": 1.0, "s2": 2.0, "sin": 1.0, "cos": np.sin(1.0),
                    "s_sin": np.sin(1.0) + np.cos(1.0), "s_cos": 1.0 + np.sin(1.0)}


def check_table(table, dim=None):
    if not isinstance(table, (list, tuple)) or not table:
        raise ConfigError("a curve is a list with one coefficient table per coordinate")
    if dim is not None and len(table) != dim:
        raise ConfigError(f"curve has {len(table)} coordinates, metric dimension is {dim}")
    for row in table:
        if not isinstance(row, dict):
            raise ConfigError("each coordinate must be a mapping basis-name -> coefficient")
        for name, c in row.items():
            if name not in BASIS:
                raise ConfigError(f"unknown basis function {name!r}; use {sorted(BASIS)}")
            if not isinstance(c, (int, float)) or not np.isfinite(c):
                raise ConfigError(f"coefficient of {name!r} must be a finite number")


def coefficient_curve(table, interval=(0.0, 1.0)) -> CurveSample:
    """Curve with coordinate k equal to sum_b table[k][b] * basis_b(s), with exact velocity."""
    check_table(table)
    rows = [sorted(row.items()) for row in table]

    def position(s):
        return np.array([sum(c * BASIS[b][0](s) for b, c in row) for row in rows], dtype=float)

    def velocity(s):
        return np.array([sum(c * BASIS[b][1](s) for b, c in row) for row in rows], dtype=float)

    return CurveSample(tuple(float(a) for a in interval), position, velocity)


def random_past_causal_table(rng, dim, t_top=0.0, slack=0.8):
    """Random table on [0, 1] whose time coordinate decreases faster than light.

    x^1(s) = t_top - a s - b s^2 and every spatial coefficient set is scaled so
    the spatial speed stays below ``slack * a``; the curve is past timelike and
    stays in x^1 <= t_top.
    """
    a = rng.uniform(0.5, 2.0)
    b = rng.uniform(0.0, 1.0)
    table = [{"1": t_top, "s": -a, "s2": -b}]
    budget = slack * a / np.sqrt(dim - 1)
    names = ["s", "s2", "sin", "cos", "s_sin", "s_cos"]
    for _ in range(dim - 1):
        pick = rng.choice(names, size=3, replace=False)
        coef = rng.uniform(-1.0, 1.0, size=3)
        bound = sum(abs(c) * DERIVATIVE_BOUND[n] for c, n in zip(coef, pick))
        scale = budget / bound if bound > 0 else 0.0
        row = {str(n): float(c * scale) for n, c in zip(pick, coef)}
        row["1"] = float(rng.uniform(-1.0, 1.0))
        table.append(row)
    return table


def random_spacelike_table(rng, dim, t_top=0.0, slack=0.5):
    """Random table on [0, 1] with the spatial speed at least twice the time speed.

    x^2 carries a term ``a s`` with a in [1, 2]; the time and remaining spatial
    coordinates move slower than ``slack * a / 2``.
    """
    a = rng.uniform(1.0, 2.0)
    small = slack * a / 2
    names = ["s", "s2", "sin", "s_sin"]
    table = []
    for k in range(dim):
        pick = rng.choice(names, size=2, replace=False)
        coef = rng.uniform(-1.0, 1.0, size=2)
        bound = sum(abs(c) * DERIVATIVE_BOUND[n] for c, n in zip(coef, pick))
        scale = small / bound / np.sqrt(dim) if bound > 0 else 0.0
        row = {str(n): float(c * scale) for n, c in zip(pick, coef)}
        if k == 1:
            row["s"] = row.get("s", 0.0) + a
        table.append(row)
    table[0]["1"] = t_top - 0.5
    return table
