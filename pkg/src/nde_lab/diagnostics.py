"""Quantitative analysis of computed profiles and solutions.

Oscillatory-tail fits against the model c |z|^d cos(a |z|^(3/2) + phi),
total-variation growth, the localized L1 convergence-rate experiment,
dispersion-matrix eigenvalues, and admissibility tables that quantify how
families of smooth solutions approach a non-smooth target.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import InsufficientTailError
from .similarity_profiles import Profile

__all__ = [
    "AIRY_PHASE_COEFF",
    "AiryTailFit",
    "airy_tail_fit",
    "total_variation",
    "convergence_rate",
    "dispersion_eigenvalues",
    "GAdmissibilityReport",
    "g_admissibility_report",
]

# phase coefficient of the linearized far field: the local oscillator
# w'' = -(|z|/3) w has WKB phase (2 sqrt(3)/9) |z|^(3/2)
AIRY_PHASE_COEFF = 2.0 * math.sqrt(3.0) / 9.0


@dataclass(frozen=True)
class AiryTailFit:
    c: float          # amplitude
    a0_fit: float     # phase coefficient of |z|^(3/2)
    c0_fit: float     # phase offset
    decay_exp: float  # power-law exponent of the envelope
    residual: float   # rms misfit over the fit window


def _extrema_indices(y: np.ndarray) -> np.ndarray:
    d = np.diff(y)
    s = np.sign(d)
    s[s == 0] = 1
    return np.where(s[1:] * s[:-1] < 0)[0] + 1


def airy_tail_fit(p: Profile, limit: float | None = None,
                  window: tuple = (10.0, 50.0)) -> AiryTailFit:
    """Nonlinear least-squares fit of the oscillatory tail of ``p``.

    Model: g(z) - limit = c |z|^d cos(a |z|^(3/2) + phi) on
    -window[1] <= z <= -window[0].  Extremum spacing initializes the phase
    coefficient and a log-log fit of extremum amplitudes the envelope, so
    the full fit starts close and converges deterministically.
    """
    if limit is None:
        limit = p.far_limit
    if limit is None:
        raise ValueError("profile has no far-field value; pass limit=")
    lo = -max(window)
    hi = -min(window)
    m = (p.z >= lo) & (p.z <= hi)
    zt = np.abs(p.z[m])
    yt = p.g[m] - limit
    idx = _extrema_indices(yt)
    if idx.size < 5:
        raise InsufficientTailError(
            f"{idx.size} extrema in the fit window; need at least 5")

    # initialization from extrema: amplitudes give (c, d), spacing gives a
    ze = np.sort(zt[idx])
    amp = np.abs(yt[idx])
    d0, logc0 = np.polyfit(np.log(zt[idx]), np.log(amp), 1)
    k = np.arange(ze.size)
    slope = np.polyfit(k, ze ** 1.5, 1)[0]
    a_init = math.pi / slope

    def model(par, z):
        c, d, a, phi = par
        return c * z ** d * np.cos(a * z ** 1.5 + phi)

    best = None
    for phi0 in np.linspace(0.0, 2.0 * math.pi, 8, endpoint=False):
        fit = least_squares(lambda q: model(q, zt) - yt,
                            [math.exp(logc0), d0, a_init, phi0],
                            method="lm", max_nfev=20000)
        if best is None or fit.cost < best.cost:
            best = fit
    c, d, a, phi = best.x
    if c < 0:  # absorb the sign into the phase
        c, phi = -c, phi + math.pi
    phi = math.fmod(phi, 2.0 * math.pi)
    rms = math.sqrt(2.0 * best.cost / zt.size)
    return AiryTailFit(c=float(c), a0_fit=float(abs(a)), c0_fit=float(phi),
                       decay_exp=float(d), residual=rms)


def total_variation(p: Profile, window: tuple) -> float:
    """Sum of |g_{i+1} - g_i| over grid points inside ``window``.

    Additive over adjoining windows that split at a grid point.
    """
    lo, hi = min(window), max(window)
    if lo < p.z[0] - 1e-9 or hi > p.z[-1] + 1e-9:
        raise ValueError("window must lie within the profile grid")
    m = (p.z >= lo) & (p.z <= hi)
    return float(np.sum(np.abs(np.diff(p.g[m]))))


def convergence_rate(p: Profile, window_len: float = 1.0,
                     t_values: np.ndarray | None = None
                     ) -> tuple[float, dict]:
    """Fitted exponent q of I(t) ~ (-t)^q, where

        I(t) = int_{-window_len}^0 |g(x (-t)^(-1/3)) - limit| dx.

    Pure rescaling of the fixed profile over a geometric sweep of t < 0;
    no evolution is involved.  Returns (q, details).
    """
    limit = p.far_limit
    if limit is None:
        raise ValueError("profile needs a far-field value")
    if t_values is None:
        t_values = -np.geomspace(1e-5, 1e-2, 10)
    t_values = np.asarray(t_values, dtype=float)
    if np.any(t_values >= 0):
        raise ValueError("t values must be negative (pre-blow-up)")
    Is = np.empty(t_values.size)
    for i, t in enumerate(t_values):
        s = (-t) ** (1.0 / 3.0)
        z_edge = -window_len / s
        if z_edge < p.z[0] - 1e-9:
            raise ValueError(
                f"profile grid reaches {p.z[0]}; need {z_edge} "
                "(shrink the window or the t range)")
        m = (p.z >= z_edge) & (p.z <= 0.0)
        Is[i] = s * np.trapezoid(np.abs(p.g[m] - limit), p.z[m])
    if np.any(Is <= 0.0):
        # identically matching profile: no rate to fit
        return float("nan"), {"t": t_values, "I": Is,
                              "prefactor": float("nan")}
    q, logc = np.polyfit(np.log(-t_values), np.log(Is), 1)
    return float(q), {"t": t_values, "I": Is, "prefactor": float(np.exp(logc))}


def dispersion_eigenvalues(u: float, epsilon: float) -> np.ndarray:
    """The three eigenvalues lambda with lambda^3 = u / epsilon^2.

    Complex for any nonzero u: the real cube root and the conjugate pair
    rotated by +-2 pi/3.
    """
    if epsilon == 0:
        raise ValueError("epsilon must be nonzero")
    r = np.cbrt(u / epsilon ** 2)
    rot = np.exp(2j * np.pi / 3.0)
    return np.array([r + 0j, r * rot, r * np.conj(rot)])


@dataclass
class GAdmissibilityReport:
    """Distances of a family of smooth solutions to a non-smooth target."""

    params: list
    sup_distances: list
    l1_distances: list
    window: tuple
    tolerance: float
    verdict: str

    def rows(self):
        return list(zip(self.params, self.sup_distances, self.l1_distances))

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["param", "sup_distance", "l1_distance"])
            for row in self.rows():
                w.writerow([f"{v:.17g}" for v in row])

    def to_json(self, path=None):
        doc = {
            "window": list(self.window),
            "tolerance": self.tolerance,
            "verdict": self.verdict,
            "rows": [{"param": float(a), "sup": float(b), "l1": float(c)}
                     for a, b, c in self.rows()],
        }
        if path is None:
            return doc
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return doc


def g_admissibility_report(target, family: Callable, params: Sequence,
                           window: tuple, n_samples: int = 2001,
                           tolerance: float = 1e-3,
                           z_values: np.ndarray | None = None,
                           ) -> GAdmissibilityReport:
    """Tabulate sup and L1 distances of family(param) to ``target`` on a
    compact window.

    ``target`` and the family members must be evaluable (profiles and
    piecewise cubics both are).  Verdict is "numerically G-admissible" when
    the sup distances decrease monotonically to below ``tolerance``;
    otherwise "non-convergent" (reported, never raised).  Pass ``z_values``
    aligned with the family members' own grids to keep stored-profile
    interpolation error out of the distances.
    """
    if z_values is not None:
        zq = np.asarray(z_values, dtype=float)
        window = (float(zq[0]), float(zq[-1]))
    else:
        zq = np.linspace(window[0], window[1], n_samples)
    tv = np.asarray(target(zq), dtype=float)
    sups, l1s = [], []
    for par in params:
        member = family(par)
        mv = np.asarray(member(zq), dtype=float)
        diff = np.abs(mv - tv)
        sups.append(float(np.max(diff)))
        l1s.append(float(np.trapezoid(diff, zq)))
    monotone = all(b < a for a, b in zip(sups, sups[1:]))
    ok = monotone and sups[-1] < tolerance
    return GAdmissibilityReport(
        params=list(params), sup_distances=sups, l1_distances=l1s,
        window=tuple(window), tolerance=tolerance,
        verdict="numerically G-admissible" if ok else "non-convergent")
