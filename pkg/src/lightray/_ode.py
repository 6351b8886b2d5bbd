"""Thin wrapper around scipy's embedded Runge-Kutta 4(5) integrator."""

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegrationError

RTOL = 1e-10
ATOL = 1e-10


class _Constant:
    """Dense-output stand-in for zero-length spans."""

    def __init__(self, t0, y0):
        self.t0 = t0
        self.y0 = np.asarray(y0, dtype=float)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return self.y0.copy()
        return np.repeat(self.y0[:, None], t.size, axis=1)


def integrate(fun, t0, t1, y0, *, rtol=RTOL, atol=ATOL, t_eval=None,
              dense_output=False, events=None, max_step=np.inf):
    """Integrate ``y' = fun(t, y)`` from ``t0`` to ``t1``.

    Returns the scipy ``OdeResult``; a zero-length span returns a result whose
    ``sol`` is constant. Raises :class:`IntegrationError` on step failure.
    """
    y0 = np.asarray(y0, dtype=float)
    if t0 == t1:
        res = _TrivialResult(t0, y0, t_eval)
        return res
    try:
        sol = solve_ivp(fun, (t0, t1), y0, method="RK45", rtol=rtol, atol=atol,
                        t_eval=t_eval, dense_output=dense_output, events=events,
                        max_step=max_step)
    except (ValueError, FloatingPointError, np.linalg.LinAlgError) as exc:
        raise IntegrationError(f"integration {t0} -> {t1} failed: {exc}") from exc
    if sol.status == -1:
        raise IntegrationError(f"integration {t0} -> {t1} failed: {sol.message}")
    if not np.all(np.isfinite(sol.y)):
        raise IntegrationError(f"integration {t0} -> {t1} produced non-finite values")
    return sol


class _TrivialResult:
    def __init__(self, t0, y0, t_eval):
        self.status = 0
        self.t = np.array([t0]) if t_eval is None else np.asarray(t_eval, float)
        self.y = np.repeat(y0[:, None], self.t.size, axis=1)
        self.sol = _Constant(t0, y0)
        self.t_events = None
        self.y_events = None
