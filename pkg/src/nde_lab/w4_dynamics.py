"""Dynamics of cubic-polynomial solutions u = C0 + C1 x + C2 x^2 + C3 x^3.

The span of {1, x, x^2, x^3} is invariant under the quadratic operator
(u u_x)_xx, so the PDE restricts to a four-dimensional system

    C0' = 6 (C1 C2 + C0 C3)
    C1' = 12 (C2^2 + 2 C1 C3)
    C2' = 60 C2 C3
    C3' = 60 C3^2,

which integrates in closed form from the bottom up and blows up at
T = t0 + 1/(60 C3(t0)) whenever C3(t0) > 0.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import AtBlowupError, NonBlowupError
from .ode_core import OdeSettings, Termination, Trajectory, integrate

__all__ = [
    "W4State",
    "w4_rhs",
    "w4_closed_form",
    "w4_blowup_time",
    "integrate_w4",
    "write_trajectory_csv",
]

# evaluating fractional powers of (T - t) closer to blow-up than this
# overflows double precision in the steepest coefficient
BLOWUP_GUARD = 1e-12


@dataclass(frozen=True)
class W4State:
    t: float
    c: np.ndarray  # (C0, C1, C2, C3)

    def __post_init__(self):
        object.__setattr__(self, "c", np.asarray(self.c, dtype=float))
        if self.c.shape != (4,):
            raise ValueError("coefficient vector must have length 4")


def w4_rhs(c) -> np.ndarray:
    """Coefficient derivatives of the restricted evolution.

    Accepts a :class:`W4State` or a bare length-4 coefficient sequence.
    """
    if isinstance(c, W4State):
        c = c.c
    c0, c1, c2, c3 = c
    return np.array([
        6.0 * (c1 * c2 + c0 * c3),
        12.0 * (c2 * c2 + 2.0 * c1 * c3),
        60.0 * c2 * c3,
        60.0 * c3 * c3,
    ])


def w4_closed_form(T: float, A0: float, B0: float, D0: float,
                   t: float) -> W4State:
    """Exact orbit blowing up at time T, written in terms of s = T - t:

        C3 = 1/(60 s)
        C2 = A0 / s
        C1 = B0 s^(-2/5) + 20 A0^2 / s
        C0 = D0 s^(-1/10) + 20 A0 B0 s^(-2/5) + (400/3) A0^3 / s

    The homogeneous exponents -2/5 and -1/10 come from the linearized
    C1 and C0 equations; the 1/s terms are the particular responses to the
    C2 coupling.  Verified term by term against the system above.
    """
    if t >= T - BLOWUP_GUARD:
        raise AtBlowupError(f"t = {t} is at or past the blow-up time {T}")
    s = T - t
    c3 = 1.0 / (60.0 * s)
    c2 = A0 / s
    c1 = B0 * s ** -0.4 + 20.0 * A0 * A0 / s
    c0 = D0 * s ** -0.1 + 20.0 * A0 * B0 * s ** -0.4 + 400.0 / 3.0 * A0 ** 3 / s
    return W4State(t=t, c=np.array([c0, c1, c2, c3]))


def w4_blowup_time(c3_initial: float) -> float:
    """Blow-up time of the separable C3' = 60 C3^2 equation."""
    if c3_initial <= 0:
        raise NonBlowupError("C3(0) must be positive for finite-time blow-up")
    return 1.0 / (60.0 * c3_initial)


def integrate_w4(c0, t_span, settings: OdeSettings | None = None) -> Trajectory:
    """Integrate the coefficient system; terminates on the blow-up guard."""
    if settings is None:
        settings = OdeSettings()
    return integrate(lambda t, c: w4_rhs(c), np.asarray(c0, dtype=float),
                     t_span, settings)


def observed_blowup_time(traj: Trajectory) -> float:
    """Time at which an integrated orbit crossed the blow-up threshold."""
    if traj.termination is not Termination.BLOWUP_DETECTED:
        raise NonBlowupError("trajectory did not reach the blow-up threshold")
    return traj.final_time


def write_trajectory_csv(path, traj: Trajectory):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "C0", "C1", "C2", "C3"])
        for t, c in zip(traj.times, traj.states):
            w.writerow([f"{t:.17g}"] + [f"{v:.17g}" for v in c])
