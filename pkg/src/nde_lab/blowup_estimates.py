"""Blow-up certificates by weighted-coefficient inequalities.

Two routes:

* the cut-weight route for the first-order-in-time equation: the weighted
  coefficient J(t) = -int u (x+L)^3 dx obeys J' >= 3 J^2 / L^7, giving the
  bound T0 = L^7 / (3 J0);
* the space-time cut-off route for the second-order-in-time equation,
  yielding T0 = (c0 L^7 / (7 J0))^(1/3) with c0 the capacity integral of
  the time cut-off.

Second- and third-order comparison bounds integrate J'' (J''') = 3 J^2/L^7
with zero lower-order initial derivatives; their universal blow-up constants
are computed once by quadrature / integration and cached.
"""

from __future__ import annotations

import functools
import json
import math
import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import IntegrationWarning, quad, simpson

from .errors import (
    DivergentCutoffError,
    InsufficientSamplesError,
    NonpositiveJ0Error,
    OutOfDomainError,
)
from .ode_core import OdeSettings, Termination, integrate

__all__ = [
    "BlowupCertificate",
    "PolynomialCutoff",
    "cut_weight",
    "expansion_coefficient",
    "blowup_time_bound",
    "odi_check",
    "OdiReport",
    "capacity_bound",
]

_ORDERS = ("first", "second", "third")


def cut_weight(L: float, x):
    """Cubic weight -(x+L)^3 on [-L, 0]; triple zero at -L, w''' = -6."""
    x = np.asarray(x, dtype=float)
    if np.any(x < -L - 1e-12) or np.any(x > 1e-12):
        raise OutOfDomainError(f"weight defined on [-{L}, 0]")
    out = -((x + L) ** 3)
    return float(out) if out.ndim == 0 else out


def expansion_coefficient(x, u, L: float) -> float:
    """J = -int_{-L}^0 u(x) (x+L)^3 dx by composite Simpson quadrature."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x[0] > -L + 1e-12 or x[-1] < -1e-12:
        raise ValueError("samples must cover [-L, 0]")
    m = (x >= -L) & (x <= 0.0)
    return float(simpson(-u[m] * (x[m] + L) ** 3, x=x[m]))


@functools.cache
def _tau_star_second() -> float:
    """Blow-up time of f'' = f^2, f(0)=1, f'(0)=0.

    Energy reduction gives f'^2 = (2/3)(f^3 - 1), so the blow-up time is
    sqrt(3/2) * int_1^inf dy / sqrt(y^3 - 1).
    """
    val, _ = quad(lambda y: 1.0 / math.sqrt(y ** 3 - 1.0), 1.0, np.inf,
                  limit=400)
    return math.sqrt(1.5) * val


@functools.cache
def _tau_star_third() -> float:
    """Blow-up time of f''' = f^2, f(0)=1, f'(0)=f''(0)=0.

    Integrated to the 1e8 threshold; the remaining time follows from the
    local rate f ~ 60 (tau* - tau)^(-3).
    """
    settings = OdeSettings(rel_tol=1e-12, abs_tol=1e-12, max_step=0.5,
                           blowup_threshold=1e8)
    traj = integrate(lambda t, y: np.array([y[1], y[2], y[0] ** 2]),
                     np.array([1.0, 0.0, 0.0]), (0.0, 20.0), settings)
    if traj.termination is not Termination.BLOWUP_DETECTED:
        raise RuntimeError("comparison orbit failed to blow up")
    f_end = traj.final_state[0]
    return traj.final_time + (60.0 / f_end) ** (1.0 / 3.0)


def blowup_time_bound(J0: float, L: float, order: str = "first") -> float:
    """Upper bound on the blow-up time from J^(m) >= 3 J^2 / L^7.

    first:   T0 = L^7 / (3 J0)                 (exact integration)
    second:  T0 = tau2 * sqrt(L^7 / (3 J0))     (zero initial J')
    third:   T0 = tau3 * (L^7 / (3 J0))^(1/3)   (zero initial J', J'')

    tau2 = 2.97447742... and tau3 = 4.84822235... are the blow-up times of
    the unit-normalized comparison equations.
    """
    if J0 <= 0:
        raise NonpositiveJ0Error("J0 must be positive")
    if order not in _ORDERS:
        raise ValueError(f"order must be one of {_ORDERS}")
    base = L ** 7 / (3.0 * J0)
    if order == "first":
        return base
    if order == "second":
        return _tau_star_second() * math.sqrt(base)
    return _tau_star_third() * base ** (1.0 / 3.0)


@dataclass(frozen=True)
class OdiReport:
    satisfied: bool
    min_margin: float
    margins: np.ndarray
    times: np.ndarray


def odi_check(t, J, L: float, tol: float = 0.0) -> OdiReport:
    """Check the quadratic differential inequality J' >= 3 J^2 / L^7.

    Central differences at interior samples; ``tol`` absorbs discretization
    error of the supplied trajectory.  The exact equality orbit
    J = L^7 / (3 (T0 - t)) yields small nonnegative margins.
    """
    t = np.asarray(t, dtype=float)
    J = np.asarray(J, dtype=float)
    if t.size < 3:
        raise InsufficientSamplesError("need at least 3 samples")
    dJ = (J[2:] - J[:-2]) / (t[2:] - t[:-2])
    margins = dJ - 3.0 / L ** 7 * J[1:-1] ** 2
    min_margin = float(np.min(margins))
    return OdiReport(satisfied=bool(min_margin >= -tol),
                     min_margin=min_margin,
                     margins=margins,
                     times=t[1:-1])


class PolynomialCutoff:
    """Time cut-off tau^p (1-tau)^q on [0, 1].

    Evaluated in factored form: the expanded polynomial cancels
    catastrophically near the endpoints, exactly where the capacity
    integrand needs it most.
    """

    def __init__(self, p: int, q: int):
        if p < 2 or q < 2:
            raise ValueError("cut-off must vanish to second order at 0 and 1")
        self.p, self.q = p, q

    def __call__(self, tau):
        return tau ** self.p * (1.0 - tau) ** self.q

    def second_derivative(self, tau):
        p, q = self.p, self.q
        s = 1.0 - tau
        quad_part = (p * (p - 1) * s * s
                     - 2.0 * p * q * tau * s
                     + q * (q - 1) * tau * tau)
        return tau ** (p - 2) * s ** (q - 2) * quad_part

    def __repr__(self):
        return f"PolynomialCutoff(p={self.p}, q={self.q})"


def _capacity_integral(cutoff) -> float:
    """c0 = int_0^1 (phi'')^2 / phi, by an endpoint-shrinking ladder.

    The integrand may blow up at 0 or 1 when the cut-off vanishes too
    slowly; the ladder detects that as non-converging increments.
    """
    def integrand(tau):
        return cutoff.second_derivative(tau) ** 2 / cutoff(tau)

    deltas = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10, 1e-12]
    values = []
    with warnings.catch_warnings():
        # a divergent ladder is detected below; the slow-convergence
        # warning on its rungs is expected there
        warnings.simplefilter("ignore", IntegrationWarning)
        for d in deltas:
            v, _ = quad(integrand, d, 1.0 - d, limit=400)
            values.append(v)
    increments = np.abs(np.diff(values))
    if increments[-1] > 1e-8 * max(1.0, abs(values[-1])) or \
            not np.all(np.isfinite(values)):
        raise DivergentCutoffError(
            "capacity integral does not converge; cut-off vanishes too "
            "slowly at an endpoint")
    return float(values[-1])


def capacity_bound(x, ut0, L: float, cutoff=None) -> tuple[float, float]:
    """Capacity blow-up bound for the second-order-in-time equation.

    ``ut0`` samples the initial time derivative on [0, L].  Requires
    J0 = int_0^L ut0 (L-x)^3 dx > 0; returns (c0, T0) with
    T0 = (c0 L^7 / (7 J0))^(1/3).
    """
    if cutoff is None:
        cutoff = PolynomialCutoff(4, 4)
    x = np.asarray(x, dtype=float)
    ut0 = np.asarray(ut0, dtype=float)
    m = (x >= 0.0) & (x <= L)
    J0 = float(simpson(ut0[m] * (L - x[m]) ** 3, x=x[m]))
    if J0 <= 0:
        raise NonpositiveJ0Error(f"J0 = {J0} <= 0; no capacity bound")
    c0 = _capacity_integral(cutoff)
    T0 = (c0 * L ** 7 / (7.0 * J0)) ** (1.0 / 3.0)
    return c0, T0


@dataclass
class BlowupCertificate:
    """Summary of a blow-up bound, serializable for audits."""

    L: float
    J0: float
    order_in_time: str
    bound_T0: float
    odi_satisfied: Optional[bool] = None
    odi_margin: Optional[float] = None
    capacity_c0: Optional[float] = None
    J_trajectory: Optional[np.ndarray] = None  # rows (t, J)

    def __post_init__(self):
        if self.order_in_time not in _ORDERS:
            raise ValueError(f"order must be one of {_ORDERS}")
        if self.J0 > 0 and not self.bound_T0 > 0:
            raise ValueError("positive J0 must give a positive bound")

    def to_json(self, path=None):
        doc = {
            "L": self.L,
            "J0": self.J0,
            "order": self.order_in_time,
            "T0": self.bound_T0,
            "odi_satisfied": self.odi_satisfied,
            "odi_margin": self.odi_margin,
            "c0": self.capacity_c0,
        }
        if self.J_trajectory is not None:
            doc["J_trajectory"] = [[float(a), float(b)]
                                   for a, b in self.J_trajectory]
        if path is None:
            return doc
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return doc
