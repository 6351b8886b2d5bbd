"""Scene configuration: metric, curves, rays, sampling and tolerances.

A scene is a JSON object. ``"scene": name`` starts from a built-in scene and
the remaining top-level keys replace its entries. Metrics are either a catalog
reference ``{"name": ..., "params": {...}}`` or an inline component table::

    {"inline": {"dim": 3, "components": {"0,0": [{"coef": -1, "fn": "1", "var": 0}],
                                         "2,2": [{"coef": 1, "fn": "1", "var": 0}], ...}}}

where entry "i,j" (i <= j) is a sum of ``coef * fn(x^var)`` terms over the
curve basis. Curves are coefficient tables, one mapping per coordinate.
"""

from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from .catalog import CatalogEntry, get_entry
from .curves import BASIS, check_table, coefficient_curve
from .errors import ConfigError, LightRayError
from .geometry import MetricSpec, validate_metric

EXAMPLE_MU_TABLE = [{"s2": 0.5}, {"s_sin": 1.0, "cos": 1.0}, {"s_cos": -1.0, "sin": 1.0}]

_MINK3 = {"name": "minkowski", "params": {"m": 3}}

SCENES = {
    "minkowski3": {
        "metric": _MINK3,
        "chart": {"kind": "angle", "level": 0.0},
        "rays": [{"event": [0.5, 0.0, 0.0], "direction": [1.0, 1.0, 0.0]},
                 {"event": [0.0, 0.0, 0.0], "direction": [1.0, 0.0, 1.0]}],
        "event": [0.0, 0.0, 0.0],
        "jacobi": {"ray": {"event": [0.0, 0.0, 0.0], "direction": [1.0, 1.0, 0.0]},
                   "J": [0.0, 0.0, 1.0], "Jp": [0.0, 0.0, 1.0], "t": [0.0, 2.5, 5.0, 10.0]},
        "conjugate": {"ray": {"event": [0.0, 0.0, 0.0], "direction": [1.0, 1.0, 0.0]},
                      "tau": 0.0, "t_range": [0.0, 10.0]},
        "contact": {"samples": 200},
        "cotton": {"probes": [[0.0, 0.0, 0.0], [1.0, -2.0, 0.5]]},
        "curves": {"past_timelike": {"table": [{"s": -1.0}, {}, {}], "interval": [0.0, 1.0]},
                   "example_mu": {"table": EXAMPLE_MU_TABLE, "interval": [-1.0, 1.0]}},
        "isotopy": {"curve": "past_timelike"},
        "sampling": {"sphere": 8, "s_nodes": 201, "t_nodes": 1000},
    },
    "example_mu": {
        "metric": _MINK3,
        "chart": {"kind": "angle", "level": 0.0},
        "curves": {"example_mu": {"table": EXAMPLE_MU_TABLE, "interval": [-1.0, 1.0]}},
        "isotopy": {"curve": "example_mu"},
        "variation": {"kind": "example_mu"},
        "recover": {"seed": [0.0, 0.0], "s_range": [-1.0, 1.0]},
        "sampling": {"sphere": 64, "s_nodes": 201},
    },
    "g_eps": {
        "metric": {"name": "perturbed_minkowski", "params": {"eps": 0.5}},
        "chart": {"kind": "hemisphere", "level": 0.25},
        "rays": [{"event": [0.25, 0.0, 0.0], "direction": [1.0, 0.6, 0.8]}],
        "event": [0.25, 0.0, 0.0],
        "jacobi": {"ray": {"event": [0.0, 0.0, 0.0], "direction": [1.0, 0.6, 0.8]},
                   "J": [0.0, 0.3, -0.1], "Jp": [0.0, 0.8, -0.6], "t": [0.0, 2.5, 5.0, 10.0]},
        "conjugate": {"ray": {"event": [0.0, 0.0, 0.0], "direction": [1.0, 0.6, 0.8]},
                      "tau": 0.0, "t_range": [0.0, 5.0]},
        "cotton": {"probes": [[0.25, 0.0, 0.0]]},
        "curves": {"past_timelike": {"table": [{"1": -0.1, "s": -1.0}, {"sin": 0.3}, {}],
                                     "interval": [0.0, 1.0]}},
        "isotopy": {"curve": "past_timelike"},
        "sampling": {"sphere": 64, "s_nodes": 201, "t_nodes": 1000},
    },
    "einstein_static": {
        "metric": {"name": "einstein_static"},
        "chart": {"kind": "hemisphere", "level": 0.0},
        "rays": [{"event": [0.0, 1.5707963267948966, 0.0], "direction": [1.0, 0.6, 0.8]}],
        "event": [0.0, 1.5707963267948966, 0.0],
        "conjugate": {"ray": {"event": [0.0, 1.5707963267948966, 0.0], "direction": [1.0, 0.0, 1.0]},
                      "tau": 0.0, "t_range": [0.0, 4.0]},
        "jacobi": {"ray": {"event": [0.0, 1.5707963267948966, 0.0], "direction": [1.0, 0.0, 1.0]},
                   "J": [0.0, 0.2, 0.0], "Jp": [0.0, 1.0, 0.0], "t": [0.0, 1.0, 2.0, 3.0]},
        "cotton": {"probes": [[0.0, 1.5707963267948966, 0.0], [0.5, 1.0, 2.0]]},
        "sampling": {"sphere": 16, "t_nodes": 1000},
    },
}

DEFAULT_SCENE = "minkowski3"


def _inline_metric(spec) -> MetricSpec:
    try:
        dim = int(spec["dim"])
        table = spec["components"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"inline metric needs 'dim' and 'components': {exc}") from None
    terms = {}
    for key, entry in table.items():
        try:
            i, j = (int(k) for k in key.split(","))
        except ValueError:
            raise ConfigError(f"component key {key!r} must look like 'i,j'") from None
        if not (0 <= i < dim and 0 <= j < dim):
            raise ConfigError(f"component index {key!r} out of range for dim {dim}")
        parsed = []
        for term in entry:
            fn, var, coef = term.get("fn", "1"), int(term.get("var", 0)), term.get("coef")
            if fn not in BASIS:
                raise ConfigError(f"unknown basis function {fn!r} in component {key}")
            if not 0 <= var < dim or not isinstance(coef, (int, float)):
                raise ConfigError(f"bad term {term} in component {key}")
            parsed.append((float(coef), var, fn))
        terms[(min(i, j), max(i, j))] = parsed

    def evaluate(p, order):
        out = np.zeros((dim,) * order + (dim, dim))
        for (i, j), parsed in terms.items():
            for coef, var, fn in parsed:
                val = coef * BASIS[fn][order](p[var])
                idx = (var,) * order
                out[idx + (i, j)] += val
                if i != j:
                    out[idx + (j, i)] += val
        return out

    return MetricSpec(dim=dim, components=lambda p: evaluate(p, 0), dg=lambda p: evaluate(p, 1),
                      d2g=lambda p: evaluate(p, 2), name="inline")


@dataclass
class SceneConfig:
    raw: dict
    entry: CatalogEntry
    curves: dict = field(default_factory=dict)

    @property
    def metric(self) -> MetricSpec:
        return self.entry.metric

    @property
    def dim(self):
        return self.metric.dim

    def get(self, key, default=None):
        return self.raw.get(key, default)

    def section(self, key):
        if key not in self.raw:
            raise ConfigError(f"scene has no {key!r} section")
        return self.raw[key]

    def sampling(self, key, default):
        return self.raw.get("sampling", {}).get(key, default)

    def tolerance(self, key, default):
        val = self.raw.get("tolerances", {}).get(key, default)
        if not isinstance(val, (int, float)) or val <= 0:
            raise ConfigError(f"tolerance {key!r} must be positive")
        return float(val)

    def curve(self, name):
        try:
            return self.curves[name]
        except KeyError:
            raise ConfigError(f"unknown curve {name!r}; defined: {sorted(self.curves)}") from None

    def event(self, coords):
        p = np.asarray(coords, dtype=float)
        if p.shape != (self.dim,) or not np.all(np.isfinite(p)):
            raise ConfigError(f"event {coords} must have {self.dim} finite coordinates")
        return p

    def digest(self) -> str:
        return config_digest(self.raw)


def config_digest(raw) -> str:
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def resolve(raw) -> SceneConfig:
    """Merge with the named base scene, build the metric and curves, and validate."""
    if not isinstance(raw, dict):
        raise ConfigError("a scene config must be a JSON object")
    raw = copy.deepcopy(raw)
    base = raw.pop("scene", None)
    if base is not None:
        if base not in SCENES:
            raise ConfigError(f"unknown scene {base!r}; known: {sorted(SCENES)}")
        merged = copy.deepcopy(SCENES[base])
        merged.update(raw)
        raw = merged
    if "metric" not in raw:
        raise ConfigError("scene has no 'metric'")
    mspec = raw["metric"]
    if not isinstance(mspec, dict):
        raise ConfigError("'metric' must be an object")
    if "inline" in mspec:
        metric = _inline_metric(mspec["inline"])
        entry = CatalogEntry("inline", metric)
        probe = np.zeros(metric.dim)
        try:
            validate_metric(metric, [probe])
        except (LightRayError, ValueError) as exc:
            raise ConfigError(f"inline metric is not Lorentzian at the origin: {exc}") from None
    elif "name" in mspec:
        entry = get_entry(mspec["name"], mspec.get("params"))
    else:
        raise ConfigError("'metric' needs either 'name' or 'inline'")
    for key in ("tolerances",):
        for k, v in raw.get(key, {}).items():
            if not isinstance(v, (int, float)) or v <= 0:
                raise ConfigError(f"tolerance {k!r} must be positive")
    curves = {}
    for name, spec in raw.get("curves", {}).items():
        if not isinstance(spec, dict) or "table" not in spec:
            raise ConfigError(f"curve {name!r} needs a 'table'")
        check_table(spec["table"], entry.metric.dim)
        interval = spec.get("interval", [0.0, 1.0])
        if len(interval) != 2 or not interval[0] < interval[1]:
            raise ConfigError(f"curve {name!r} needs an increasing interval")
        curves[name] = coefficient_curve(spec["table"], interval)
    return SceneConfig(raw, entry, curves)


def load(path=None, scene=None) -> SceneConfig:
    if path is not None:
        try:
            with open(path) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if scene is not None:
            raw = dict(raw, scene=scene)
        return resolve(raw)
    return resolve({"scene": scene or DEFAULT_SCENE})
