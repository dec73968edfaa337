"""Method-of-lines solver for the regularized dispersion equation

    u_t = 1/2 (u^2)_xxx - eps u_xxxx

on [-L, L] with far-field-pinned Dirichlet data, plus the rescaled
similarity-variable equation v_tau = (v v_z)_zz - z v_z / 3.

The nonlinear term is the third central difference of the nodal square
(conservative form), so constants and clean steps are discretely
stationary; the fourth-difference term supplies the parabolic
regularization.  Time stepping is classical RK4 under a combined
dispersive/diffusive step limit.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, replace
from typing import Callable, Optional

import numpy as np

from .errors import (
    BlowupDetectedError,
    CflViolationError,
    InvalidGridError,
    OutOfWindowError,
)
from .similarity_profiles import Profile, SimilarityParams

try:  # pragma: no cover - exercised implicitly by every simulation
    from numba import njit as _numba_njit

    def _jit(fn):
        return _numba_njit(cache=True)(fn)
except ImportError:  # pragma: no cover
    def _jit(fn):
        return fn

__all__ = [
    "RiemannData",
    "PdeState",
    "StepControl",
    "Diagnostics",
    "make_state",
    "state_from_values",
    "stable_dt",
    "step",
    "evolve",
    "h_minus1_norm",
    "rescale_to_similarity",
    "rescaled_state_from_profile",
    "evolve_rescaled",
]

# step-limit safety factors: c3 scales dx^3/|u| for the dispersive term,
# c4 scales dx^4/eps for the fourth-difference term (RK4's negative real
# axis caps the latter at about 0.17)
C3_DEFAULT = 0.25
C4_DEFAULT = 0.15
C_ADVECTION = 0.5

_STEP_VALUES = {
    "s-minus": (1.0, -1.0),
    "s-plus": (-1.0, 1.0),
    "h-left": (1.0, 0.0),
    "h-right": (0.0, 1.0),
}


@dataclass(frozen=True)
class RiemannData:
    """Step-function initial data, optionally mollified by a tanh ramp.

    ``smoothing_width`` of ``None`` requests the default 4*dx ramp; zero
    keeps the raw step (grid-scale oscillations are then physical but
    pollute convergence studies).
    """

    kind: str
    smoothing_width: Optional[float] = None
    profile: Optional[Callable] = None  # used when kind == "custom"

    def __post_init__(self):
        if self.kind not in (*_STEP_VALUES, "custom"):
            raise ValueError(f"unknown Riemann data kind {self.kind!r}")
        if self.smoothing_width is not None and self.smoothing_width < 0:
            raise ValueError("smoothing width must be nonnegative")
        if self.kind == "custom" and self.profile is None:
            raise ValueError("custom data needs a profile callable")


class Boundary(enum.Enum):
    PINNED_FAR_FIELD = "pinned_far_field"
    DIRICHLET_ZERO = "dirichlet_zero"


@dataclass
class PdeState:
    x: np.ndarray
    u: np.ndarray
    t: float
    epsilon: float
    bc: Boundary = Boundary.PINNED_FAR_FIELD
    pin_left: float = 0.0
    pin_right: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.u = np.asarray(self.u, dtype=float)
        if self.x.size < 64:
            raise InvalidGridError("grid must have at least 64 nodes")
        if self.x.shape != self.u.shape:
            raise ValueError("x and u must have equal length")

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    @property
    def n(self) -> int:
        return self.x.size

    def copy(self) -> "PdeState":
        return replace(self, u=self.u.copy())


def make_state(data: RiemannData, L: float, n: int,
               epsilon: float) -> PdeState:
    """Initial state for one of the step-data problems on [-L, L]."""
    if n < 64:
        raise InvalidGridError("grid must have at least 64 nodes")
    if epsilon < 0:
        raise ValueError("epsilon must be nonnegative")
    x = np.linspace(-L, L, n)
    dx = x[1] - x[0]
    if data.kind == "custom":
        u = np.asarray(data.profile(x), dtype=float)
        pin_l, pin_r = float(u[0]), float(u[-1])
        return PdeState(x=x, u=u, t=0.0, epsilon=epsilon,
                        pin_left=pin_l, pin_right=pin_r)
    ul, ur = _STEP_VALUES[data.kind]
    w = 4.0 * dx if data.smoothing_width is None else data.smoothing_width
    if w == 0.0:
        u = np.where(x < 0, ul, np.where(x > 0, ur, 0.5 * (ul + ur)))
    else:
        u = ur + (ul - ur) * 0.5 * (1.0 - np.tanh(x / w))
    return PdeState(x=x, u=u.astype(float), t=0.0, epsilon=epsilon,
                    pin_left=ul, pin_right=ur)


def state_from_values(u0, L: float, n: int, epsilon: float,
                      bc: Boundary = Boundary.PINNED_FAR_FIELD) -> PdeState:
    """State from explicit nodal values or a callable u0(x)."""
    x = np.linspace(-L, L, n)
    u = np.asarray(u0(x) if callable(u0) else u0, dtype=float)
    if bc is Boundary.DIRICHLET_ZERO:
        pins = (0.0, 0.0)
    else:
        pins = (float(u[0]), float(u[-1]))
    return PdeState(x=x, u=u, t=0.0, epsilon=epsilon, bc=bc,
                    pin_left=pins[0], pin_right=pins[1])


# ---------------------------------------------------------------------------
# kernels (numba-compiled when available; plain Python otherwise)


def _rhs_flux(u, dx, eps, pin_l, pin_r):
    n = u.shape[0]
    ue = np.empty(n + 4)
    ue[2:-2] = u
    ue[0] = pin_l
    ue[1] = pin_l
    ue[-2] = pin_r
    ue[-1] = pin_r
    f = 0.5 * ue * ue
    out = np.zeros(n)
    inv3 = 1.0 / (2.0 * dx ** 3)
    inv4 = 1.0 / dx ** 4
    for i in range(1, n - 1):
        j = i + 2
        d3 = (f[j + 2] - 2.0 * f[j + 1] + 2.0 * f[j - 1] - f[j - 2]) * inv3
        out[i] = d3
        if eps > 0.0:
            d4 = (ue[j + 2] - 4.0 * ue[j + 1] + 6.0 * ue[j]
                  - 4.0 * ue[j - 1] + ue[j - 2]) * inv4
            out[i] -= eps * d4
    return out


def _rhs_rescaled(u, x, dx, eps, pin_l, pin_r):
    n = u.shape[0]
    ue = np.empty(n + 4)
    ue[2:-2] = u
    ue[0] = pin_l
    ue[1] = pin_l
    ue[-2] = pin_r
    ue[-1] = pin_r
    f = 0.5 * ue * ue
    out = np.zeros(n)
    inv1 = 1.0 / (2.0 * dx)
    inv3 = 1.0 / (2.0 * dx ** 3)
    inv4 = 1.0 / dx ** 4
    for i in range(1, n - 1):
        j = i + 2
        d3 = (f[j + 2] - 2.0 * f[j + 1] + 2.0 * f[j - 1] - f[j - 2]) * inv3
        d1 = (ue[j + 1] - ue[j - 1]) * inv1
        out[i] = d3 - x[i] / 3.0 * d1
        if eps > 0.0:
            d4 = (ue[j + 2] - 4.0 * ue[j + 1] + 6.0 * ue[j]
                  - 4.0 * ue[j - 1] + ue[j - 2]) * inv4
            out[i] -= eps * d4
    return out


def _rk4_flux(u, dx, eps, pin_l, pin_r, dt):
    k1 = _rhs_flux(u, dx, eps, pin_l, pin_r)
    k2 = _rhs_flux(u + 0.5 * dt * k1, dx, eps, pin_l, pin_r)
    k3 = _rhs_flux(u + 0.5 * dt * k2, dx, eps, pin_l, pin_r)
    k4 = _rhs_flux(u + dt * k3, dx, eps, pin_l, pin_r)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _rk4_rescaled(u, x, dx, eps, pin_l, pin_r, dt):
    k1 = _rhs_rescaled(u, x, dx, eps, pin_l, pin_r)
    k2 = _rhs_rescaled(u + 0.5 * dt * k1, x, dx, eps, pin_l, pin_r)
    k3 = _rhs_rescaled(u + 0.5 * dt * k2, x, dx, eps, pin_l, pin_r)
    k4 = _rhs_rescaled(u + dt * k3, x, dx, eps, pin_l, pin_r)
    return u + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _solve_hm1(u, dx):
    """g with g'' = -u (second difference), g = 0 at both ends; Thomas."""
    n = u.shape[0]
    g = np.zeros(n)
    m = n - 2
    cp = np.empty(m)
    dp = np.empty(m)
    b = -2.0
    cp[0] = 1.0 / b
    dp[0] = -u[1] * dx * dx / b
    for i in range(1, m):
        den = b - cp[i - 1]
        cp[i] = 1.0 / den
        dp[i] = (-u[i + 1] * dx * dx - dp[i - 1]) / den
    g[m] = dp[m - 1]
    for i in range(m - 2, -1, -1):
        g[i + 1] = dp[i] - cp[i] * g[i + 2]
    return g


def _trapz(y, dx):
    s = 0.5 * (y[0] + y[-1])
    for i in range(1, y.shape[0] - 1):
        s += y[i]
    return s * dx


def _evolve_kernel(u, x, dx, eps, pin_l, pin_r, t, t_end, c3, c4,
                   threshold, rec_times, rescaled):
    nrec = rec_times.shape[0]
    rec_t = np.empty(nrec)
    rec_mass = np.empty(nrec)
    rec_mass_center = np.empty(nrec)
    rec_hm1 = np.empty(nrec)
    rec_sup = np.empty(nrec)
    boundary_touch = -1.0
    n = u.shape[0]
    ic_lo = n // 4
    ic_hi = n - 1 - n // 4
    zmax = max(abs(x[0]), abs(x[-1]))
    irec = 0
    status = 0
    nsteps = 0
    while True:
        # record every crossing of the next scheduled time
        while irec < nrec and t >= rec_times[irec] - 1e-14:
            rec_t[irec] = t
            rec_mass[irec] = _trapz(u, dx)
            rec_mass_center[irec] = _trapz(u[ic_lo:ic_hi + 1], dx)
            g = _solve_hm1(u, dx)
            rec_hm1[irec] = np.sqrt(abs(_trapz(g * u, dx)))
            rec_sup[irec] = np.max(np.abs(u))
            if boundary_touch < 0.0:
                dev = 0.0
                for k in range(1, 6):
                    dev = max(dev, abs(u[k] - pin_l), abs(u[n - 1 - k] - pin_r))
                if dev > 1e-3:
                    boundary_touch = t
            irec += 1
        if t >= t_end or status != 0:
            break
        umax = np.max(np.abs(u))
        if umax > threshold:
            status = 1
            break
        dt = c3 * dx ** 3 / max(1.0, umax)
        if eps > 0.0:
            dt = min(dt, c4 * dx ** 4 / eps)
        if rescaled:
            dt = min(dt, C_ADVECTION * dx * 3.0 / zmax)
        remaining = t_end - t
        if dt > remaining:
            dt = remaining
        if irec < nrec and t + dt > rec_times[irec]:
            dt = rec_times[irec] - t
        if dt <= 0.0:
            break
        if rescaled:
            u = _rk4_rescaled(u, x, dx, eps, pin_l, pin_r, dt)
        else:
            u = _rk4_flux(u, dx, eps, pin_l, pin_r, dt)
        t += dt
        nsteps += 1
        if not np.isfinite(u).all():
            status = 1
            break
    return (u, t, status, irec, rec_t, rec_mass, rec_mass_center, rec_hm1,
            rec_sup, boundary_touch, nsteps)


_rhs_flux = _jit(_rhs_flux)
_rhs_rescaled = _jit(_rhs_rescaled)
_rk4_flux = _jit(_rk4_flux)
_rk4_rescaled = _jit(_rk4_rescaled)
_solve_hm1 = _jit(_solve_hm1)
_trapz = _jit(_trapz)
_evolve_kernel = _jit(_evolve_kernel)


# ---------------------------------------------------------------------------
# public stepping interface


@dataclass(frozen=True)
class StepControl:
    c3: float = C3_DEFAULT
    c4: float = C4_DEFAULT
    blowup_threshold: float = 1e8
    n_records: int = 201


def stable_dt(state: PdeState, c3: float = C3_DEFAULT,
              c4: float = C4_DEFAULT, rescaled: bool = False) -> float:
    """Largest admissible RK4 step for the current state."""
    dx = state.dx
    umax = float(np.max(np.abs(state.u)))
    dt = c3 * dx ** 3 / max(1.0, umax)
    if state.epsilon > 0:
        dt = min(dt, c4 * dx ** 4 / state.epsilon)
    if rescaled:
        zmax = max(abs(float(state.x[0])), abs(float(state.x[-1])))
        dt = min(dt, C_ADVECTION * dx * 3.0 / zmax)
    return dt


def step(state: PdeState, dt: float,
         control: StepControl | None = None) -> PdeState:
    """One RK4 step; boundary nodes stay pinned via constant ghost values."""
    if control is None:
        control = StepControl()
    limit = stable_dt(state, control.c3, control.c4)
    if dt > limit * (1.0 + 1e-9):
        raise CflViolationError(f"dt = {dt} exceeds stability limit {limit}")
    u_new = _rk4_flux(state.u, state.dx, state.epsilon,
                      state.pin_left, state.pin_right, dt)
    if np.max(np.abs(u_new)) > control.blowup_threshold:
        raise BlowupDetectedError("solution magnitude crossed the blow-up "
                                  "threshold", state=state)
    return replace(state, u=u_new, t=state.t + dt)


@dataclass
class Diagnostics:
    t: np.ndarray
    mass_total: np.ndarray
    mass_center: np.ndarray
    hminus1: np.ndarray
    sup: np.ndarray
    boundary_touched: Optional[float]
    n_steps: int

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "mass_total", "mass_center", "hminus1", "sup"])
            for row in zip(self.t, self.mass_total, self.mass_center,
                           self.hminus1, self.sup):
                w.writerow([f"{v:.17g}" for v in row])


def _run(state: PdeState, t_end: float, control: StepControl,
         rescaled: bool) -> tuple[PdeState, Diagnostics]:
    if t_end <= state.t:
        raise ValueError("t_end must exceed the current time")
    rec_times = np.linspace(state.t, t_end, control.n_records)
    out = _evolve_kernel(state.u.copy(), state.x, state.dx, state.epsilon,
                         state.pin_left, state.pin_right, state.t, t_end,
                         control.c3, control.c4, control.blowup_threshold,
                         rec_times, rescaled)
    (u, t, status, nrec, rec_t, rec_mass, rec_mc, rec_hm1, rec_sup,
     btouch, nsteps) = out
    diag = Diagnostics(
        t=rec_t[:nrec].copy(),
        mass_total=rec_mass[:nrec].copy(),
        mass_center=rec_mc[:nrec].copy(),
        hminus1=rec_hm1[:nrec].copy(),
        sup=rec_sup[:nrec].copy(),
        boundary_touched=None if btouch < 0 else float(btouch),
        n_steps=int(nsteps),
    )
    new_state = replace(state, u=u, t=float(t))
    if status != 0:
        raise BlowupDetectedError(
            f"solution exceeded the blow-up threshold at t = {t}",
            diagnostics=diag, state=new_state)
    return new_state, diag


def evolve(state: PdeState, t_end: float,
           control: StepControl | None = None) -> tuple[PdeState, Diagnostics]:
    """Advance to ``t_end`` with stability-limited steps and diagnostics.

    Diagnostics sample interior mass (total and central half), the discrete
    negative-Sobolev norm, and the sup norm on a uniform schedule; the first
    time the solution moves off its pins near either boundary is reported as
    ``boundary_touched`` (the valid window for far-field comparisons).
    """
    return _run(state, t_end, control or StepControl(), rescaled=False)


def h_minus1_norm(state: PdeState) -> float:
    """Discrete negative-Sobolev norm sqrt(int g u) with g'' = -u, g(+-L)=0.

    Tridiagonal elimination for g, trapezoid quadrature for the pairing.
    Conserved by the unregularized flow for pinned data; decays like
    -2 eps |u_x|^2 (for the squared norm) under regularization.
    """
    g = _solve_hm1(state.u, state.dx)
    val = _trapz(g * state.u, state.dx)
    return float(np.sqrt(max(val, 0.0)))


def rescale_to_similarity(state: PdeState, T_blowup: float | None = None,
                          branch: str = "rarefaction",
                          z_grid: np.ndarray | None = None) -> Profile:
    """View the current solution in similarity variables v(z) = u(z s, t).

    ``s = (T - t)^(1/3)`` on the blow-up branch (t < T), ``s = t^(1/3)`` on
    the rarefaction branch (t > 0).
    """
    if branch == "blowup":
        if T_blowup is None or state.t >= T_blowup:
            raise OutOfWindowError("blow-up rescaling needs t < T_blowup")
        s = (T_blowup - state.t) ** (1.0 / 3.0)
    elif branch == "rarefaction":
        if state.t <= 0:
            raise OutOfWindowError("rarefaction rescaling needs t > 0")
        s = state.t ** (1.0 / 3.0)
    else:
        raise ValueError(f"unknown branch {branch!r}")
    if z_grid is None:
        z_grid = np.linspace(-6.0, 6.0, 1201)
    xq = z_grid * s
    if xq[0] < state.x[0] - 1e-12 or xq[-1] > state.x[-1] + 1e-12:
        raise OutOfWindowError("requested window exceeds the simulated domain")
    v = np.interp(xq, state.x, state.u)
    return Profile(z=z_grid.copy(), g=v,
                   params=SimilarityParams(0.0, branch))


def rescaled_state_from_profile(profile: Profile, z_lim: float, n: int,
                                epsilon: float = 0.0) -> PdeState:
    """Seed the similarity-variable evolution with a sampled profile."""
    z = np.linspace(-z_lim, z_lim, n)
    v = profile(z)
    return PdeState(x=z, u=v, t=0.0, epsilon=epsilon,
                    pin_left=float(v[0]), pin_right=float(v[-1]))


@dataclass
class RescaledSeries:
    tau: np.ndarray
    sup_distance: np.ndarray
    window: tuple


def evolve_rescaled(state: PdeState, tau_end: float,
                    control: StepControl | None = None,
                    window: tuple = (-3.0, 3.0),
                    reference: np.ndarray | None = None,
                    ) -> tuple[PdeState, RescaledSeries]:
    """Integrate v_tau = (v v_z)_zz - z v_z / 3 (- eps v_zzzz if set).

    Tracks the sup distance to ``reference`` (default: the seed values) on
    the compact ``window`` at the diagnostic schedule.
    """
    if control is None:
        control = StepControl()
    ref = state.u.copy() if reference is None else np.asarray(reference)
    seed = state.copy()
    mask = (state.x >= window[0]) & (state.x <= window[1])

    n_rec = control.n_records
    taus = np.linspace(state.t, tau_end, n_rec)
    sup_d = np.empty(n_rec)
    cur = seed
    for i, tau in enumerate(taus):
        if tau > cur.t:
            cur, _ = _run(cur, tau, replace(control, n_records=2),
                          rescaled=True)
        sup_d[i] = float(np.max(np.abs(cur.u[mask] - ref[mask])))
    return cur, RescaledSeries(tau=taus, sup_distance=sup_d, window=window)


def write_snapshot_csv(path, state: PdeState):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x", "u"])
        for xi, ui in zip(state.x, state.u):
            w.writerow([f"{xi:.17g}", f"{ui:.17g}"])
