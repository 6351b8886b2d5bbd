"""Batch command-line front end: scene config in, JSON or CSV results out.

Exit status: 0 all checks pass, 1 a check failed, 2 usage or config error,
3 numerical error.
"""

from __future__ import annotations

import argparse
import enum
import io
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import acceptance, config
from .catalog import example_mu, example_mu_ds, example_mu_dt, example_mu_variation, exact_mink3_contact
from .contact import contact_along, contact_value
from .errors import ConfigError, LightRayError, NumericalError
from .geometry import cotton_tensor
from .isotopy import (celestial_recover, classify_profile, default_sphere_samples, isotopy_from_curve,
                      pointwise_verdict, sign_profile)
from .jacobi import (JacobiField, JacobiState, Variation, change_matrix, check_admissible, conjugate_scan,
                     tangent_from_chart)
from .rays import RayChart, ray_coords, ray_from_coords, ray_through, sky_sample

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3

COMMANDS = ("ray", "sky", "jacobi", "conjugate", "contact", "isotopy", "recover", "cotton", "chart",
            "selftest")


@dataclass
class ResultEnvelope:
    command: str
    config_digest: str
    payload: dict = field(default_factory=dict)
    classifications: dict = field(default_factory=dict)
    checks: list = field(default_factory=list)

    @property
    def passed(self):
        return all(c["passed"] for c in self.checks)

    def to_dict(self):
        return {"command": self.command, "config_digest": self.config_digest, "payload": self.payload,
                "classifications": self.classifications, "checks": self.checks, "passed": self.passed}

    def to_json(self):
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        return cls(d["command"], d["config_digest"], d["payload"], d["classifications"], d["checks"])


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def _check(name, residual, tolerance, passed=None):
    residual = float(residual)
    if passed is None:
        passed = bool(np.isfinite(residual) and residual < tolerance)
    return {"name": name, "passed": bool(passed), "residual": residual, "tolerance": float(tolerance)}


@dataclass
class Options:
    tol: float | None
    threads: int
    seed: int

    def tolerance(self, default):
        return default if self.tol is None else self.tol


# ---------------------------------------------------------------------------
# helpers


def _chart(cfg):
    spec = cfg.get("chart", {})
    try:
        return RayChart(cfg.metric, kind=spec.get("kind", "hemisphere"), level=float(spec.get("level", 0.0)),
                        sign=int(spec.get("sign", 1)))
    except ValueError as exc:
        raise ConfigError(f"bad chart: {exc}") from None


def _ray_from_spec(cfg, spec, level):
    """Canonical ray from {"event": p, "direction": frame components of a null future vector}."""
    try:
        p = cfg.event(spec["event"])
        d = np.asarray(spec["direction"], dtype=float)
    except (KeyError, TypeError) as exc:
        raise ConfigError(f"ray spec needs 'event' and 'direction': {exc}") from None
    if d.shape != (cfg.dim,):
        raise ConfigError(f"direction {spec['direction']} must have {cfg.dim} components")
    return ray_through(cfg.metric, p, cfg.metric.frame(p) @ d, level=level)


def _coords_or_none(chart, ray):
    try:
        return [np.concatenate(ray_coords(chart, ray))]
    except LightRayError:
        return [None]


# ---------------------------------------------------------------------------
# commands


def cmd_ray(cfg, opts):
    """Canonicalize the scene rays and report their chart coordinates."""
    chart = _chart(cfg)
    rows, through, null = [], 0.0, 0.0
    for spec in cfg.section("rays"):
        ray, mark = _ray_from_spec(cfg, spec, chart.level)
        p = cfg.event(spec["event"])
        through = max(through, float(np.linalg.norm(ray.point(mark) - p)))
        v = ray.velocity
        null = max(null, abs(cfg.metric.inner(ray.anchor, v, v)))
        rows.append({"anchor": ray.anchor, "direction": ray.direction, "mark": mark,
                     "chart_coords": _coords_or_none(chart, ray)[0]})
    tol = opts.tolerance(1e-7)
    return {"rays": rows}, {}, [_check("passes_through_event", through, tol),
                                _check("null_velocity", null, tol)]


def cmd_sky(cfg, opts):
    """Sample the sky of the scene event."""
    p = cfg.event(cfg.section("event"))
    n = int(cfg.sampling("sphere", 8))
    level = _chart(cfg).level
    rays = sky_sample(cfg.metric, p, n, level=level, threads=opts.threads)
    dist = max(float(np.linalg.norm(r.point(r.mark) - p)) for r in rays)
    rows = [{"anchor": r.anchor, "direction": r.direction, "mark": r.mark} for r in rays]
    return {"event": p, "rays": rows}, {}, [_check("passes_through_event", dist, opts.tolerance(1e-7))]


def cmd_jacobi(cfg, opts):
    """Propagate a Jacobi field and report contact-value drift."""
    spec = cfg.section("jacobi")
    ray, _ = _ray_from_spec(cfg, spec["ray"], _chart(cfg).level)
    ts = np.asarray(spec.get("t", [0.0, 10.0]), dtype=float)
    try:
        state = JacobiState(ray, float(spec.get("t0", 0.0)), spec["J"], spec["Jp"])
        check_admissible(state)
        samples = JacobiField(state).sample(ts)
    except KeyError as exc:
        raise ConfigError(f"jacobi section needs {exc}") from None
    values = contact_along(state, ts)
    payload = {"t": ts, "J": [s.J for s in samples], "Jp": [s.Jp for s in samples], "contact": values}
    return payload, {}, [_check("contact_drift", float(np.ptp(values)), opts.tolerance(1e-8))]


def cmd_conjugate(cfg, opts):
    """Scan a ray for points conjugate to gamma(tau)."""
    spec = cfg.section("conjugate")
    ray, _ = _ray_from_spec(cfg, spec["ray"], _chart(cfg).level)
    tau = float(spec.get("tau", 0.0))
    t_range = spec.get("t_range", [0.0, 10.0])
    grid = int(cfg.sampling("t_nodes", 1000))
    found = conjugate_scan(ray, tau, t_range, grid=grid)
    checks = []
    oracles = cfg.entry.oracles
    if "conjugate" in oracles and not oracles["conjugate"]:
        checks.append(_check("no_conjugate_points", len(found), 0.5))
    if "conjugate_first" in oracles and t_range[0] <= tau + oracles["conjugate_first"] <= t_range[1]:
        err = abs(found[0] - tau - oracles["conjugate_first"]) if found else np.inf
        checks.append(_check("first_conjugate_vs_oracle", err, opts.tolerance(1e-3)))
    return {"ray": {"anchor": ray.anchor, "direction": ray.direction}, "tau": tau,
            "conjugate_parameters": found}, {"null_non_conjugate": not found}, checks


def cmd_contact(cfg, opts):
    """Compare the contact form with its closed form (Minkowski-3 angle chart)."""
    spec = cfg.get("contact", {})
    chart = _chart(cfg)
    m = cfg.dim
    if "tangents" in spec:
        items = [(np.asarray(t["x"], float), np.atleast_1d(np.asarray(t["u"], float)),
                  np.asarray(t["xdot"], float), np.atleast_1d(np.asarray(t["udot"], float)))
                 for t in spec["tangents"]]
    else:
        rng = np.random.default_rng(opts.seed)
        items = []
        for _ in range(int(spec.get("samples", 100))):
            x = rng.uniform(-2, 2, m - 1)
            if chart.kind == "angle":
                u = np.array([rng.uniform(0, 2 * np.pi)])
            else:
                u = rng.uniform(-0.5, 0.5, m - 2)
            items.append((x, u, rng.standard_normal(m - 1), rng.standard_normal(m - 2)))

    def evaluate(item):
        x, u, xdot, udot = item
        return contact_value(tangent_from_chart(chart, x, u, xdot, udot).representative())

    if opts.threads > 1:
        with ThreadPoolExecutor(max_workers=opts.threads) as pool:
            values = list(pool.map(evaluate, items))
    else:
        values = [evaluate(it) for it in items]
    checks = []
    if cfg.metric.flat and m == 3 and chart.kind == "angle":
        dev = max(abs(v - exact_mink3_contact(u[0], np.concatenate([xd, ud])))
                  for v, (x, u, xd, ud) in zip(values, items))
        checks.append(_check("max_deviation_from_exact_alpha", dev, opts.tolerance(1e-8)))
    payload = {"tangents": [{"x": x, "u": u, "xdot": xd, "udot": ud, "alpha": v}
                            for v, (x, u, xd, ud) in zip(values, items)]}
    return payload, {}, checks


def _profile_payload(profile):
    return {"s": profile.s_grid, "units": profile.units, "values": profile.values}


def _windows(spec, profile, tol):
    return {f"[{a}, {b}]": classify_profile(profile, tol=tol, window=(a, b)).to_dict()
            for a, b in spec.get("windows", [])}


def cmd_isotopy(cfg, opts):
    """Sign profile and causal class of a scene curve."""
    spec = cfg.section("isotopy")
    curve = cfg.curve(spec["curve"])
    n = int(spec.get("n", default_sphere_samples(cfg.dim)))
    s_grid = np.linspace(curve.interval[0], curve.interval[1], int(cfg.sampling("s_nodes", 201)))
    tol = opts.tolerance(cfg.tolerance("sign", 1e-9))
    profile = sign_profile(isotopy_from_curve(cfg.metric, curve, n=n, s_grid=s_grid))
    cls = classify_profile(profile, tol=tol)
    pointwise = pointwise_verdict(cfg.metric, curve, s_grid)
    classes = {"curve": spec["curve"], **cls.to_dict(), "pointwise_verdict": pointwise.value,
               "windows": _windows(spec, profile, tol)}
    checks = [_check("agrees_with_pointwise_causal_character", float(cls.verdict is not pointwise), 0.5)]
    return {"profile": _profile_payload(profile)}, classes, checks, profile


def _variation(cfg, spec):
    kind = spec.get("kind")
    metric = cfg.metric
    if kind == "example_mu":
        if not (cfg.dim == 3 and metric.flat):
            raise ConfigError("the example_mu variation lives in Minkowski-3")
        return Variation(metric, example_mu_variation, example_mu_ds, example_mu_dt), None
    if kind == "lift":
        base = cfg.curve(spec["curve"])
        sign = {"velocity": 1.0, "reverse": -1.0}.get(spec.get("direction", "velocity"))
        if sign is None:
            raise ConfigError("lift direction must be 'velocity' or 'reverse'")
        return Variation.from_lift(metric, base.position, lambda s: sign * base.velocity(s)), base
    raise ConfigError(f"unknown variation kind {kind!r}; use 'example_mu' or 'lift'")


def cmd_recover(cfg, opts):
    """Recover a celestial curve from a ray variation and classify it."""
    spec = cfg.get("recover", {})
    var, base = _variation(cfg, cfg.section("variation"))
    seed = spec.get("seed", [0.0, 0.0])
    s_range = spec.get("s_range", [-1.0, 1.0])
    n_s = int(cfg.sampling("s_nodes", 201))
    rec = celestial_recover(cfg.metric, var, seed, s_range, n_s=n_s)
    tol = opts.tolerance(1e-6)
    checks = [_check("null_curve", rec.checks["null"], 1e-8),
              _check("velocity_proportional_to_ray", rec.checks["proportional"], 1e-6),
              _check("contact_orthogonality", rec.checks["orthogonal"], 1e-8)]
    probe = rec.s_nodes
    if cfg.section("variation").get("kind") == "example_mu":
        checks.append(_check("max_abs_t", max(abs(rec.t(s)) for s in probe), tol))
        checks.append(_check("mu_vs_closed_form", max(float(np.max(np.abs(rec.mu(s) - example_mu(s))))
                                                      for s in probe), tol))
    elif base is not None:
        checks.append(_check("mu_vs_base_curve", max(float(np.max(np.abs(rec.mu(s) - base.position(s))))
                                                     for s in probe), tol))
    n = int(spec.get("n", default_sphere_samples(cfg.dim)))
    sign_tol = cfg.tolerance("sign", 1e-9)
    profile = sign_profile(isotopy_from_curve(cfg.metric, rec.as_curve(), n=n, s_grid=rec.s_nodes))
    cls = classify_profile(profile, tol=sign_tol)
    windows = spec.get("windows")
    if windows is None:
        step = float(rec.s_nodes[1] - rec.s_nodes[0])
        windows = [[s_range[0], -0.5 * step], [0.5 * step, s_range[1]]] if s_range[0] < 0 < s_range[1] else []
    classes = {**cls.to_dict(), "windows": _windows({"windows": windows}, profile, sign_tol)}
    payload = {"s": rec.s_nodes, "t": rec.t_nodes, "mu": [rec.mu(s) for s in rec.s_nodes],
               "alternates": rec.alternates, "profile": _profile_payload(profile)}
    return payload, classes, checks, profile


def cmd_cotton(cfg, opts):
    """Cotton tensor at the scene probes."""
    probes = cfg.section("cotton").get("probes", [])
    out, anti, peak = [], 0.0, 0.0
    for q in probes:
        C = cotton_tensor(cfg.metric, cfg.event(q))
        out.append({"event": q, "C": C})
        anti = max(anti, float(np.max(np.abs(C + np.transpose(C, (0, 2, 1))))))
        peak = max(peak, float(np.max(np.abs(C))))
    checks = [_check("antisymmetry_jk", anti, opts.tolerance(1e-10))]
    if cfg.metric.flat:
        checks.append(_check("flat_metric_cotton_vanishes", peak, opts.tolerance(1e-10)))
    return {"probes": out}, {"conformally_flat_at_probes": peak < 1e-10}, checks


def cmd_chart(cfg, opts):
    """Coordinate-change matrix of the scene chart."""
    chart = _chart(cfg)
    m = cfg.dim
    rows, trip, block = [], 0.0, 0.0
    for spec in cfg.section("rays"):
        ray, _ = _ray_from_spec(cfg, spec, chart.level)
        x, u = ray_coords(chart, ray)
        back = ray_from_coords(chart, x, u)
        trip = max(trip, float(np.max(np.abs(back.anchor - ray.anchor))),
                   float(np.max(np.abs(back.direction - ray.direction))))
        M, A, B = change_matrix(chart, x, u)
        nx, nu = m - 1, m - 2
        # the v-block in udot is d(u^3..u^m)/du: the identity in the hemisphere chart
        expected = np.column_stack([chart.unit_derivative(u, e)[1:] for e in np.eye(nu)])
        block = max(block, float(np.max(np.abs(M[:nu, nx:] - expected))), float(np.max(np.abs(M[nu:, nx:]))))
        rows.append({"x": x, "u": u, "A": A, "B": B, "det_A": float(np.linalg.det(A))})
    tol = opts.tolerance(1e-8)
    return {"rays": rows, "chart": {"kind": chart.kind, "level": chart.level}}, {}, [
        _check("ray_coords_round_trip", trip, tol), _check("change_matrix_block_structure", block, tol)]


def cmd_selftest(cfg, opts, criteria=None):
    """Run the acceptance criteria."""
    results = acceptance.run_all(criteria, seed=opts.seed)
    checks = [dict(c.to_dict(), name=f"criterion_{r.number}: {c.name}") for r in results for c in r.checks]
    classes = {f"criterion_{r.number}": "pass" if r.passed else "fail" for r in results}
    return {"criteria": [{"number": r.number, "title": r.title, "seconds": round(r.seconds, 3)}
                         for r in results]}, classes, checks


HANDLERS = {"ray": cmd_ray, "sky": cmd_sky, "jacobi": cmd_jacobi, "conjugate": cmd_conjugate,
            "contact": cmd_contact, "isotopy": cmd_isotopy, "recover": cmd_recover,
            "cotton": cmd_cotton, "chart": cmd_chart, "selftest": cmd_selftest}


# ---------------------------------------------------------------------------
# driver


def build_parser():
    parser = argparse.ArgumentParser(prog="lightray", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=(HANDLERS[name].__doc__ or f"run the {name} pipeline").rstrip("."))
        p.add_argument("--config", help="scene config (JSON)")
        p.add_argument("--scene", choices=sorted(config.SCENES),
                       help="built-in scene; with --config it is the base the config overrides")
        p.add_argument("--out", help="write the result here instead of stdout")
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--tol", type=float, help="override the check tolerance")
        p.add_argument("--threads", type=int, help="worker threads (default $LIGHTRAY_THREADS or 1)")
        p.add_argument("--seed", type=int, default=0, help="seed for random probes")
        if name == "selftest":
            p.add_argument("--criteria", type=int, nargs="+", choices=sorted(acceptance.CRITERIA),
                           help="run only these criteria")
    return parser


def _threads(arg):
    if arg is not None:
        n = arg
    else:
        env = os.environ.get("LIGHTRAY_THREADS", "1")
        try:
            n = int(env)
        except ValueError:
            raise ConfigError(f"LIGHTRAY_THREADS must be an integer, got {env!r}") from None
    if n < 1:
        raise ConfigError("thread count must be positive")
    return n


def _csv(env: ResultEnvelope, profile):
    buf = io.StringIO()
    if profile is not None:
        buf.write("s,sample_index,value\n")
        for j, s in enumerate(profile.s_grid):
            for i in range(profile.values.shape[0]):
                buf.write(f"{float(s)!r},{i},{float(profile.values[i, j])!r}\n")
    else:
        buf.write("name,passed,residual,tolerance\n")
        for c in env.checks:
            buf.write(f"{c['name']},{c['passed']},{c['residual']!r},{c['tolerance']!r}\n")
    return buf.getvalue()


def run(argv=None, stdout=None):
    """Run one command; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        if args.tol is not None and not args.tol > 0:
            raise ConfigError("--tol must be positive")
        opts = Options(args.tol, _threads(args.threads), args.seed)
        cfg = config.load(args.config, args.scene)
        handler = HANDLERS[args.command]
        if args.command == "selftest":
            result = handler(cfg, opts, args.criteria)
        else:
            result = handler(cfg, opts)
    except ConfigError as exc:
        print(f"lightray {args.command}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"lightray {args.command}: numerical error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (LightRayError, ValueError, KeyError, TypeError) as exc:
        print(f"lightray {args.command}: invalid input: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    payload, classes, checks = result[:3]
    profile = result[3] if len(result) > 3 else None
    env = ResultEnvelope(args.command, cfg.digest(), _plain(payload), _plain(classes), _plain(checks))
    text = env.to_json() if args.format == "json" else _csv(env, profile)
    if args.out:
        try:
            with open(args.out, "w") as fh:
                fh.write(text)
        except OSError as exc:
            print(f"lightray {args.command}: cannot write {args.out}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    else:
        stdout.write(text)
    return EXIT_OK if env.passed else EXIT_CHECK


def main(argv=None):
    try:
        code = run(argv)
    except BrokenPipeError:
        # downstream closed early (e.g. piped into head)
        sys.stderr.close()
        code = EXIT_OK
    sys.exit(code)


if __name__ == "__main__":
    main()
