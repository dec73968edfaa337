"""Adaptive explicit Runge-Kutta integration and bracketed root finding.

The integrator is a Dormand-Prince embedded 4(5) pair with PI step-size
control, cubic-Hermite dense output, scalar event location, and blow-up /
step-underflow termination.  All heavier constructions in the package
(profile shooting, comparison inequalities, coefficient dynamics) run
through :func:`integrate`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MaxIterationsError, NoSignChangeError

__all__ = [
    "OdeSettings",
    "Termination",
    "Trajectory",
    "integrate",
    "find_root",
]


@dataclass(frozen=True)
class OdeSettings:
    """Tolerances and guards for adaptive integration.

    ``nu`` is the regularization parameter used by the degenerate profile
    equations; it rides along here so a single settings object configures a
    whole experiment.
    """

    rel_tol: float = 1e-12
    abs_tol: float = 1e-12
    nu: float = 1e-12
    max_step: float = 1.0
    min_step: float = 1e-14
    max_steps: int = 1_000_000
    blowup_threshold: float = 1e8

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if not 0 <= self.nu:
            raise ValueError("nu must be nonnegative")
        if not 0 < self.min_step < self.max_step:
            raise ValueError("need 0 < min_step < max_step")
        if self.blowup_threshold <= 0:
            raise ValueError("blowup_threshold must be positive")


class Termination(enum.Enum):
    REACHED_END = "reached_end"
    EVENT_HIT = "event_hit"
    BLOWUP_DETECTED = "blowup_detected"
    STEP_UNDERFLOW = "step_underflow"


# Dormand-Prince 4(5) tableau (same pair as the classic ode45 solvers).
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
# difference between the 5th- and 4th-order weights; drives the error estimate
_E = np.array([71 / 57600, 0.0, -71 / 16695, 71 / 1920,
               -17253 / 339200, 22 / 525, -1 / 40])


@dataclass
class Trajectory:
    """Accepted integration steps plus enough data for dense evaluation.

    ``times`` is strictly monotone (decreasing for backward integration).
    ``derivs`` holds the right-hand side at each accepted point, which makes
    the cubic-Hermite interpolant of :meth:`sample` C1 across steps.
    """

    times: np.ndarray
    states: np.ndarray
    derivs: np.ndarray
    termination: Termination
    event_index: Optional[int] = None
    event_time: Optional[float] = None
    n_rhs: int = 0

    def __len__(self):
        return len(self.times)

    @property
    def final_state(self) -> np.ndarray:
        return self.states[-1]

    @property
    def final_time(self) -> float:
        return float(self.times[-1])

    def sample(self, t):
        """Cubic-Hermite dense output at scalar or array ``t`` (within span)."""
        t_in = np.asarray(t, dtype=float)
        scalar = t_in.ndim == 0
        t = np.atleast_1d(t_in)
        ts = self.times
        ascending = ts[-1] >= ts[0]
        if ascending:
            idx = np.clip(np.searchsorted(ts, t, side="right") - 1, 0, len(ts) - 2)
        else:
            idx = np.clip(np.searchsorted(-ts, -t, side="right") - 1, 0, len(ts) - 2)
        t0 = ts[idx]
        h = ts[idx + 1] - t0
        th = ((t - t0) / h)[:, None]
        y0 = self.states[idx]
        y1 = self.states[idx + 1]
        f0 = self.derivs[idx]
        f1 = self.derivs[idx + 1]
        hcol = h[:, None]
        out = ((1 - th) * y0 + th * y1
               + th * (th - 1) * ((1 - 2 * th) * (y1 - y0)
                                  + (th - 1) * hcol * f0 + th * hcol * f1))
        return out[0] if scalar else out


def _error_norm(err, y_old, y_new, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _hermite(th, y0, y1, f0, f1, h):
    return ((1 - th) * y0 + th * y1
            + th * (th - 1) * ((1 - 2 * th) * (y1 - y0)
                               + (th - 1) * h * f0 + th * h * f1))


def integrate(rhs: Callable[[float, np.ndarray], np.ndarray],
              y0,
              span: tuple[float, float],
              settings: OdeSettings | None = None,
              events: Optional[Sequence[Callable[[float, np.ndarray], float]]] = None,
              ) -> Trajectory:
    """Integrate ``y' = rhs(t, y)`` over ``span`` with adaptive 4(5) stepping.

    Terminates at the end of the span, at the first sign change of any event
    function (located on the dense output to ``rel_tol * |span|`` in time),
    when any state component exceeds ``settings.blowup_threshold``, or when
    the controller would need a step below ``settings.min_step``.
    """
    if settings is None:
        settings = OdeSettings()
    t0, t_end = float(span[0]), float(span[1])
    if t0 == t_end:
        raise ValueError("degenerate span")
    y = np.asarray(y0, dtype=float).copy()
    if y.ndim != 1:
        raise ValueError("state must be one-dimensional")
    if not np.all(np.isfinite(y)):
        raise ValueError("initial state must be finite")
    direction = 1.0 if t_end > t0 else -1.0
    span_len = abs(t_end - t0)
    time_tol = settings.rel_tol * span_len

    f = rhs(t0, y)
    f = np.asarray(f, dtype=float)
    n_rhs = 1

    # initial step: crude first-derivative heuristic, refined by the controller
    scale = settings.abs_tol + settings.rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean((y / scale) ** 2))
    d1 = np.sqrt(np.mean((f / scale) ** 2))
    h = 0.01 * d0 / d1 if d1 > 1e-12 * max(d0, 1.0) else span_len / 100.0
    if not np.isfinite(h) or h <= 0:
        h = span_len / 100.0
    h = min(h, settings.max_step, span_len)
    h *= direction

    times = [t0]
    states = [y.copy()]
    derivs = [f.copy()]
    ev_vals = [float(e(t0, y)) for e in events] if events else []

    t = t0
    err_prev = 1.0
    termination = Termination.REACHED_END
    event_index = None
    event_time = None
    k = np.empty((7, y.size))
    k[0] = f

    for _ in range(settings.max_steps):
        if direction * (t_end - t) <= 0:
            break
        if abs(h) > direction * (t_end - t):
            h = t_end - t
        clipped = abs(h) <= settings.min_step and abs(t_end - t) > settings.min_step * 2

        # stages (FSAL: k[0] already holds rhs at (t, y))
        for i in range(1, 7):
            yi = y + h * (k[:i].T @ _A[i])
            k[i] = rhs(t + _C[i] * h, yi)
        n_rhs += 6
        y_new = yi  # stage 7 argument equals the 5th-order solution
        err_vec = h * (k.T @ _E)
        err = _error_norm(err_vec, y, y_new, settings.rel_tol, settings.abs_tol)

        if np.isnan(err):
            err = np.inf

        if err <= 1.0:
            t_new = t + h
            f_new = k[6]
            accept_state = y_new

            hit_event = None
            if events:
                new_vals = [float(e(t_new, y_new)) for e in events]
                for ie, (v0, v1) in enumerate(zip(ev_vals, new_vals)):
                    if v0 == 0.0:
                        ev_vals[ie] = v1
                        continue
                    if v0 * v1 <= 0.0 and v1 != v0:
                        hit_event = ie
                        break
                if hit_event is None:
                    ev_vals = new_vals

            if hit_event is not None:
                # bisection for the crossing on the Hermite interpolant
                e_fn = events[hit_event]
                lo, hi = 0.0, 1.0
                v_lo = ev_vals[hit_event]
                for _bi in range(80):
                    mid = 0.5 * (lo + hi)
                    y_mid = _hermite(mid, y, y_new, k[0], f_new, h)
                    v_mid = float(e_fn(t + mid * h, y_mid))
                    if v_lo * v_mid <= 0.0 and v_mid != 0.0:
                        hi = mid
                    else:
                        lo, v_lo = mid, v_mid
                    if (hi - lo) * abs(h) < time_tol:
                        break
                th_ev = 0.5 * (lo + hi)
                t_new = t + th_ev * h
                accept_state = _hermite(th_ev, y, y_new, k[0], f_new, h)
                f_new = np.asarray(rhs(t_new, accept_state), dtype=float)
                n_rhs += 1
                termination = Termination.EVENT_HIT
                event_index = hit_event
                event_time = t_new

            times.append(t_new)
            states.append(np.array(accept_state, copy=True))
            derivs.append(np.array(f_new, copy=True))

            if termination is Termination.EVENT_HIT:
                break
            if np.max(np.abs(accept_state)) > settings.blowup_threshold:
                termination = Termination.BLOWUP_DETECTED
                break

            t = t_new
            y = np.array(accept_state, copy=True)
            k[0] = f_new

            if err == 0.0:
                factor = 10.0
            else:
                factor = 0.9 * err ** -0.17 * err_prev ** 0.04
            err_prev = max(err, 1e-4)
            factor = min(10.0, max(0.2, factor))
            h = direction * min(abs(h) * factor, settings.max_step)
        else:
            if clipped or abs(h) <= settings.min_step:
                termination = Termination.STEP_UNDERFLOW
                break
            factor = max(0.1, min(1.0, 0.9 * err ** -0.2))
            h *= factor
            if abs(h) < settings.min_step:
                termination = Termination.STEP_UNDERFLOW
                break
    else:
        termination = Termination.STEP_UNDERFLOW

    return Trajectory(
        times=np.array(times),
        states=np.array(states),
        derivs=np.array(derivs),
        termination=termination,
        event_index=event_index,
        event_time=event_time,
        n_rhs=n_rhs,
    )


def find_root(f: Callable[[float], float],
              bracket: tuple[float, float],
              tol: float = 1e-13,
              max_iter: int = 200) -> float:
    """Locate a root of ``f`` inside ``bracket`` to bracket width ``tol``.

    Secant steps accelerate plain bisection; every third iteration bisects
    unconditionally, so the bracket provably shrinks and convergence is
    guaranteed for any continuous sign-changing ``f``.
    """
    a, b = float(bracket[0]), float(bracket[1])
    fa, fb = float(f(a)), float(f(b))
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0) == (fb > 0):
        raise NoSignChangeError(f"f({a}) = {fa} and f({b}) = {fb} have equal sign")

    for it in range(max_iter):
        if abs(b - a) <= tol:
            return b if abs(fb) <= abs(fa) else a
        x = 0.5 * (a + b)
        if it % 3 != 2 and fb != fa:
            x_sec = b - fb * (b - a) / (fb - fa)
            lo, hi = (a, b) if a < b else (b, a)
            pad = 1e-3 * (hi - lo)
            if lo + pad < x_sec < hi - pad:
                x = x_sec
        fx = float(f(x))
        if fx == 0.0:
            return x
        if (fx > 0) == (fa > 0):
            a, fa = x, fx
        else:
            b, fb = x, fx

    raise MaxIterationsError(f"no convergence within {max_iter} iterations")
