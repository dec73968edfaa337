"""Self-similar profile construction for the quadratic third-order
dispersion equation.

Profiles g(z) solve, on the blow-up branch,

    (g g')'' = (1+a)/3 * g' z - a g,

and on the rarefaction branch the same equation with the right-hand side
negated.  Written out and divided by g, the equation is singular where the
profile vanishes, so integration uses the regularized form

    g''' = sign(g)/sqrt(nu^2 + g^2) * ((1+a)/3 * g' z - a g - 3 g' g'').

Shooting from the origin (anti-symmetric branch) or backwards from a zero
at z0 > 0 produces the shock, interface, and non-symmetric families.
"""

from __future__ import annotations

import csv
import enum
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import ode_core
from .errors import (
    BlowupDetectedError,
    CompleteBlowupError,
    DomainError,
    InsufficientTailError,
    ShootingFailedError,
    SingularAtOriginError,
    UnclassifiedSingularityError,
)
from .ode_core import OdeSettings, Termination, integrate

__all__ = [
    "ALPHA_CRITICAL",
    "Classification",
    "SimilarityParams",
    "Profile",
    "SingularityReport",
    "rhs_regularized",
    "origin_series",
    "shoot_profile",
    "shoot_origin_slope",
    "complete_blowup_orbit",
    "rescale_profile",
    "estimate_far_field_limit",
    "interface_profile",
    "solve_heaviside",
    "singular_point_family",
    "detect_singularity",
    "reflect_to_rarefaction",
    "final_time_profile",
]

# below this exponent every origin shot hits a square-root singularity
ALPHA_CRITICAL = -0.1

ORIGIN_OFFSET = 1e-4     # shooting starts at z = -ORIGIN_OFFSET, not 0
INTERFACE_OFFSET = 1e-3  # backward integration starts this far inside z0
DEFAULT_DZ = 0.02        # resampling step for stored profiles


class Classification(enum.Enum):
    BOUNDED_OSCILLATORY = "bounded_oscillatory"
    CUBIC_GROWTH = "cubic_growth"
    FINITE_INTERFACE = "finite_interface"
    SQRT_SINGULARITY = "sqrt_singularity"


@dataclass(frozen=True)
class SimilarityParams:
    """Similarity exponents: time exponent ``alpha``, space exponent
    ``beta = (1 + alpha)/3``, and the branch of the profile equation."""

    alpha: float
    branch: str = "blowup"

    def __post_init__(self):
        if self.branch not in ("blowup", "rarefaction"):
            raise ValueError(f"unknown branch {self.branch!r}")

    @property
    def beta(self) -> float:
        return (1.0 + self.alpha) / 3.0

    @property
    def far_field_exponent(self) -> float:
        """Envelope power |z|^(3a/(1+a)) of the far field."""
        return 3.0 * self.alpha / (1.0 + self.alpha)


@dataclass
class Profile:
    """A sampled similarity profile on a strictly increasing grid."""

    z: np.ndarray
    g: np.ndarray
    params: SimilarityParams
    origin_slope: Optional[float] = None
    far_limit: Optional[float] = None
    interface_z0: Optional[float] = None
    classification: Optional[Classification] = None

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        if self.z.shape != self.g.shape:
            raise ValueError("z and g must have equal length")
        if np.any(np.diff(self.z) <= 0):
            raise ValueError("z must be strictly increasing")

    def __call__(self, zq):
        """Linear interpolation onto ``zq`` (clamped at the grid ends)."""
        return np.interp(zq, self.z, self.g)

    def metadata(self) -> dict:
        cls = self.classification.value if self.classification else None
        return {
            "alpha": self.params.alpha,
            "beta": self.params.beta,
            "branch": self.params.branch,
            "origin_slope": self.origin_slope,
            "far_limit": self.far_limit,
            "interface_z0": self.interface_z0,
            "classification": cls,
            "z_min": float(self.z[0]),
            "z_max": float(self.z[-1]),
            "n_samples": int(self.z.size),
        }

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["z", "g"])
            for zi, gi in zip(self.z, self.g):
                w.writerow([f"{zi:.17g}", f"{gi:.17g}"])

    def to_json(self, path=None):
        doc = {"metadata": self.metadata(),
               "z": [float(v) for v in self.z],
               "g": [float(v) for v in self.g]}
        if path is None:
            return doc
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return doc


def rhs_regularized(state, z: float, alpha: float, nu: float,
                    branch: str = "blowup"):
    """Right-hand side (g', g'', g''') of the regularized profile equation."""
    g, gp, gpp = state
    if branch == "blowup":
        forcing = (1.0 + alpha) / 3.0 * gp * z - alpha * g
    else:
        forcing = -(1.0 + alpha) / 3.0 * gp * z + alpha * g
    sign = 0.0 if g == 0.0 else math.copysign(1.0, g)
    gppp = sign / math.sqrt(nu * nu + g * g) * (forcing - 3.0 * gp * gpp)
    return (gp, gpp, gppp)


def _profile_ode(alpha: float, nu: float, branch: str):
    sgn = 1.0 if branch == "blowup" else -1.0
    coef = sgn * (1.0 + alpha) / 3.0
    acoef = sgn * alpha

    def f(z, y):
        g, gp, gpp = y
        s = 0.0 if g == 0.0 else math.copysign(1.0, g)
        gppp = s / math.sqrt(nu * nu + g * g) * (coef * gp * z - acoef * g
                                                 - 3.0 * gp * gpp)
        return np.array([gp, gpp, gppp])

    return f


def origin_series(C: float, z: float) -> float:
    """Local anti-symmetric expansion g = C z + z^3/72 + z^5/(72^2 C) used to
    start integration away from the degenerate origin (a = 0 branch)."""
    if C == 0.0:
        raise DomainError("origin expansion needs a nonzero slope")
    return C * z + z ** 3 / 72.0 + z ** 5 / (72.0 ** 2 * C)


def _origin_seed(C: float, delta: float, alpha: float):
    """(g, g', g'') at z = -delta from the local expansion.

    The cubic coefficient (1 - 2a)/72 is forced by the leading balance of
    the profile equation; the quintic term only matters at a = 0 and is
    below round-off at the default offset.
    """
    a3 = (1.0 - 2.0 * alpha) / 72.0
    z = -delta
    g = C * z + a3 * z ** 3
    gp = C + 3.0 * a3 * z * z
    gpp = 6.0 * a3 * z
    if alpha == 0.0:
        g += z ** 5 / (72.0 ** 2 * C)
        gp += 5.0 * z ** 4 / (72.0 ** 2 * C)
        gpp += 20.0 * z ** 3 / (72.0 ** 2 * C)
    return np.array([g, gp, gpp])


def _extrema_indices(g: np.ndarray) -> np.ndarray:
    d = np.diff(g)
    s = np.sign(d)
    s[s == 0] = 1
    return np.where(s[1:] * s[:-1] < 0)[0] + 1


def _tail_mean(z: np.ndarray, y: np.ndarray, periods: int = 5):
    """Average of ``y`` over the last ``periods`` full oscillations.

    ``z`` ascending; the tail is at the most negative end.  Returns the
    trapezoid mean between extrema 0 and 2*periods; falls back to fewer
    periods (at least two) when the tail resolves fewer oscillations.
    """
    idx = _extrema_indices(y)
    if idx.size < 2 * periods + 1:
        if idx.size >= 5:
            periods = (idx.size - 1) // 2
        else:
            raise InsufficientTailError(
                f"only {idx.size} extrema resolved; need at least 5")
    i0, i1 = idx[0], idx[2 * periods]
    mean = np.trapezoid(y[i0:i1 + 1], z[i0:i1 + 1]) / (z[i1] - z[i0])
    amp = 0.5 * np.ptp(y[i0:i1 + 1])
    return float(mean), float(amp)


def estimate_far_field_limit(p: Profile, periods: int = 5) -> float:
    """Far-field constant of an oscillatory profile.

    For a = 0 this is the mean of g over the last ``periods`` oscillation
    periods; for a != 0 the oscillation rides on the envelope
    C_- |z|^(3a/(1+a)) and the same average is applied to
    g / |z|^(3a/(1+a)), returning the envelope coefficient C_-.
    """
    if p.classification in (Classification.CUBIC_GROWTH,
                            Classification.SQRT_SINGULARITY):
        raise InsufficientTailError("profile has no bounded oscillatory tail")
    mask = p.z <= -2.0
    if not np.any(p.z <= -30.0):
        raise InsufficientTailError("grid must reach z <= -30")
    z = p.z[mask]
    y = p.g[mask]
    pexp = p.params.far_field_exponent
    if pexp != 0.0:
        y = y / np.abs(z) ** pexp
    if _extrema_indices(y).size < 3:
        # constant or non-oscillatory tail: fall back to a plain mean
        tail = y[z <= z[0] + 0.25 * (z[-1] - z[0])]
        if np.ptp(tail) < 1e-9 * max(1.0, np.max(np.abs(tail))):
            return float(np.mean(tail))
        raise InsufficientTailError("fewer than 3 oscillations resolved")
    mean, _ = _tail_mean(z, y, periods)
    return mean


def rescale_profile(p: Profile, a: float) -> Profile:
    """Apply the scaling symmetry g_a(z) = a^3 g(z/a).

    The grid maps to a*z, the origin slope to a^2 C, the far-field
    descriptor to a^(3-e) L with e the envelope exponent, and an interface
    to a*z0.
    """
    if a == 0.0:
        raise ValueError("scale factor must be nonzero")
    z = a * p.z
    g = a ** 3 * p.g
    if a < 0:
        z = z[::-1].copy()
        g = g[::-1].copy()
    pexp = p.params.far_field_exponent
    far = None if p.far_limit is None else a ** (3.0 - pexp) * p.far_limit
    slope = None if p.origin_slope is None else a * a * p.origin_slope
    z0 = None if p.interface_z0 is None else a * p.interface_z0
    return Profile(z=z, g=g, params=p.params, origin_slope=slope,
                   far_limit=far, interface_z0=z0,
                   classification=p.classification)


def _classify_failure(traj, settings) -> "SingularityReport":
    """Fit the local model at a terminated orbit's endpoint."""
    zq = traj.times
    n = max(8, len(zq) // 6)
    return detect_singularity(zq[-n:], traj.states[-n:, 0])


def shoot_profile(alpha: float, target_limit: float,
                  settings: OdeSettings | None = None,
                  z_min: float = -50.0,
                  dz: float = DEFAULT_DZ) -> Profile:
    """Anti-symmetric profile with prescribed far-field value.

    Strategy: integrate once from the origin with slope -1, measure the
    far-field descriptor, and map onto the target with the scaling symmetry
    (one integration, no parameter search).  Bisection over the slope is
    used only if the tail estimate fails.
    """
    if settings is None:
        settings = OdeSettings()
    if target_limit <= 0:
        raise ValueError("target_limit must be positive")
    if alpha < ALPHA_CRITICAL:
        raise CompleteBlowupError(
            f"alpha = {alpha} < {ALPHA_CRITICAL}: orbits end in sqrt "
            "singularities and no bounded profile exists")
    if alpha <= -1.0:
        raise ValueError("alpha must exceed -1 on this branch")

    ode = _profile_ode(alpha, settings.nu, "blowup")
    pexp = 3.0 * alpha / (1.0 + alpha)
    margin = 1.6
    z_reach = z_min * margin

    y0 = _origin_seed(-1.0, ORIGIN_OFFSET, alpha)
    traj = integrate(ode, y0, (-ORIGIN_OFFSET, z_reach), settings)
    if traj.termination is not Termination.REACHED_END:
        report = _classify_failure(traj, settings)
        if report.classification is Classification.SQRT_SINGULARITY:
            raise CompleteBlowupError(
                f"orbit hit a sqrt singularity near z = {report.z0:.4f}")
        raise ShootingFailedError(
            f"integration terminated early ({traj.termination.value})")

    zs = np.arange(z_reach + dz, -ORIGIN_OFFSET, dz)
    gs = traj.sample(zs)[:, 0]
    yv = gs if pexp == 0.0 else gs / np.abs(zs) ** pexp
    try:
        ell, _ = _tail_mean(zs[zs <= -2.0], yv[zs <= -2.0])
    except InsufficientTailError:
        return _shoot_by_bisection(alpha, target_limit, settings, z_min, dz)
    if ell <= 0:
        raise ShootingFailedError(f"measured far-field value {ell} <= 0")

    a = (target_limit / ell) ** (1.0 / (3.0 - pexp))
    if not 1.0 / margin <= a:
        # rescaled grid would not reach z_min; integrate once more, directly
        # at the solved slope
        return _direct_profile(alpha, -a * a, target_limit, settings, z_min, dz)

    # densely sample the rescaled solution a^3 g(z/a) on the output grid
    half = np.linspace(z_min, 0.0, int(round(-z_min / dz)) + 1)
    g_half = np.empty_like(half)
    inner = half / a >= -ORIGIN_OFFSET
    g_half[~inner] = a ** 3 * traj.sample(half[~inner] / a)[:, 0]
    g_half[inner] = -a * a * half[inner]  # leading term only; |z| < a*1e-4
    g_half[-1] = 0.0

    z_full = np.concatenate([half, -half[-2::-1]])
    g_full = np.concatenate([g_half, -g_half[-2::-1]])
    prof = Profile(z=z_full, g=g_full,
                   params=SimilarityParams(alpha, "blowup"),
                   origin_slope=-a * a,
                   classification=Classification.BOUNDED_OSCILLATORY)
    prof.far_limit = estimate_far_field_limit(prof)
    return prof


def shoot_origin_slope(alpha: float, C: float,
                       settings: OdeSettings | None = None,
                       z_min: float = -50.0,
                       dz: float = DEFAULT_DZ) -> Profile:
    """Single anti-symmetric origin shot with prescribed slope C < 0.

    No far-field matching: this is the raw one-parameter family, used
    directly when the normalization of interest is the origin slope (e.g.
    approaching the critical saw profile).
    """
    if settings is None:
        settings = OdeSettings()
    if C >= 0:
        raise ValueError("origin slope must be negative")
    ode = _profile_ode(alpha, settings.nu, "blowup")
    traj = integrate(ode, _origin_seed(C, ORIGIN_OFFSET, alpha),
                     (-ORIGIN_OFFSET, z_min - dz), settings)
    if traj.termination is not Termination.REACHED_END:
        report = _classify_failure(traj, settings)
        if report.classification is Classification.SQRT_SINGULARITY:
            raise CompleteBlowupError(
                f"orbit hit a sqrt singularity near z = {report.z0:.4f}")
        raise ShootingFailedError(
            f"integration terminated early ({traj.termination.value})")
    half = np.linspace(z_min, 0.0, int(round(-z_min / dz)) + 1)
    g_half = np.empty_like(half)
    inner = half >= -ORIGIN_OFFSET
    g_half[~inner] = traj.sample(half[~inner])[:, 0]
    g_half[inner] = C * half[inner]
    g_half[-1] = 0.0
    z_full = np.concatenate([half, -half[-2::-1]])
    g_full = np.concatenate([g_half, -g_half[-2::-1]])
    prof = Profile(z=z_full, g=g_full,
                   params=SimilarityParams(alpha, "blowup"),
                   origin_slope=C,
                   classification=Classification.BOUNDED_OSCILLATORY)
    try:
        prof.far_limit = estimate_far_field_limit(prof)
    except InsufficientTailError:
        prof.far_limit = None
    return prof


def complete_blowup_orbit(alpha: float, C: float = -1.0,
                          settings: OdeSettings | None = None,
                          z_min: float = -50.0):
    """Orbit below the critical exponent, integrated into its singularity.

    Returns (z, g, report): the sampled orbit up to the termination point
    and the fitted local model (a sqrt singularity for alpha < -1/10).
    """
    if settings is None:
        settings = OdeSettings()
    ode = _profile_ode(alpha, settings.nu, "blowup")
    traj = integrate(ode, _origin_seed(C, ORIGIN_OFFSET, alpha),
                     (-ORIGIN_OFFSET, z_min), settings)
    if traj.termination is Termination.REACHED_END:
        raise ShootingFailedError(
            "orbit stayed bounded; no singularity before z_min")
    report = _classify_failure(traj, settings)
    return traj.times.copy(), traj.states[:, 0].copy(), report


def _direct_profile(alpha, C, target_limit, settings, z_min, dz):
    prof = shoot_origin_slope(alpha, C, settings, z_min, dz)
    if prof.far_limit is None:
        raise ShootingFailedError("far-field estimate failed")
    return prof


def _shoot_by_bisection(alpha, target_limit, settings, z_min, dz):
    """Fallback: bisection on the origin slope against a crude tail mean."""
    ode = _profile_ode(alpha, settings.nu, "blowup")
    pexp = 3.0 * alpha / (1.0 + alpha)

    def measured(C):
        traj = integrate(ode, _origin_seed(C, ORIGIN_OFFSET, alpha),
                         (-ORIGIN_OFFSET, z_min), settings)
        if traj.termination is not Termination.REACHED_END:
            raise ShootingFailedError("orbit terminated during bisection")
        zs = np.arange(z_min + dz, 0.8 * z_min, dz)
        gs = traj.sample(zs)[:, 0]
        if pexp != 0.0:
            gs = gs / np.abs(zs) ** pexp
        return float(np.mean(gs))

    lo, hi = -4.0, -1e-3  # slopes bracketing any O(1) target
    f = lambda C: measured(C) - target_limit
    flo, fhi = f(lo), f(hi)
    if flo * fhi > 0:
        raise ShootingFailedError("could not bracket the target far-field value")
    C = ode_core.find_root(f, (lo, hi), tol=1e-10)
    return _direct_profile(alpha, C, target_limit, settings, z_min, dz)


def interface_profile(alpha: float, z0: float,
                      settings: OdeSettings | None = None,
                      z_min: float = -50.0,
                      dz: float = DEFAULT_DZ,
                      pad: float = 2.0) -> Profile:
    """Profile vanishing identically beyond a finite interface at z0 > 0.

    Seeded with the quadratic-contact expansion
    g = A (z - z0)^2 + B (z - z0)^3, A = (1+a) z0 / 18, B = (2-a)/126,
    whose leading coefficient kills the lowest-order residual of the profile
    equation.  Beyond z0 the profile is extended by zero; g and g' vanish at
    z0 so the flux (g g')' is continuous there.
    """
    if settings is None:
        settings = OdeSettings()
    if z0 <= 0:
        raise ValueError("interface position must be positive")
    A = (1.0 + alpha) * z0 / 18.0
    B = (2.0 - alpha) / 126.0
    s = -INTERFACE_OFFSET
    y0 = np.array([A * s * s + B * s ** 3,
                   2.0 * A * s + 3.0 * B * s * s,
                   2.0 * A + 6.0 * B * s])
    ode = _profile_ode(alpha, settings.nu, "blowup")
    traj = integrate(ode, y0, (z0 + s, z_min - dz), settings)
    if traj.termination is not Termination.REACHED_END:
        raise BlowupDetectedError(
            f"orbit left the bounded regime ({traj.termination.value})")

    n_neg = int(round((z0 - z_min) / dz))
    z_in = np.linspace(z_min, z0, n_neg + 1)
    g_in = np.empty_like(z_in)
    seeded = z_in >= z0 + s
    g_in[~seeded] = traj.sample(z_in[~seeded])[:, 0]
    sloc = z_in[seeded] - z0
    g_in[seeded] = A * sloc * sloc + B * sloc ** 3
    g_in[-1] = 0.0
    n_pad = int(round(pad / dz))
    z_out = z0 + dz * np.arange(1, n_pad + 1)
    z = np.concatenate([z_in, z_out])
    g = np.concatenate([g_in, np.zeros(n_pad)])
    prof = Profile(z=z, g=g, params=SimilarityParams(alpha, "blowup"),
                   interface_z0=z0,
                   classification=Classification.FINITE_INTERFACE)
    try:
        prof.far_limit = estimate_far_field_limit(prof)
    except InsufficientTailError:
        prof.far_limit = None
    return prof


def solve_heaviside(settings: OdeSettings | None = None,
                    z_min: float = -30.0) -> tuple[float, float, Profile]:
    """Interface profile normalized to far-field value 1 (a = 0).

    One backward integration from z0 = 1 plus a rescale with a^3 ell = 1;
    the interface maps to z0 = a.  Returns (z0, g(0), profile).
    """
    base = interface_profile(0.0, 1.0, settings, z_min=z_min)
    ell = base.far_limit
    if ell is None or ell <= 0:
        raise ShootingFailedError("far-field estimate failed for the z0=1 shot")
    a = ell ** (-1.0 / 3.0)
    prof = rescale_profile(base, a)
    prof.far_limit = estimate_far_field_limit(prof)
    h0 = float(prof(0.0))
    return a, h0, prof


def singular_point_family(z0: float, C: float,
                          settings: OdeSettings | None = None,
                          z_min: float = -50.0,
                          z_max: float | None = None,
                          dz: float = DEFAULT_DZ) -> Profile:
    """Non-symmetric profile passing regularly through a zero at z0 > 0.

    Seeds g = C (z-z0) + (z0/18)(z-z0)^2 + (z-z0)^3/72 with C < 0 on both
    sides of z0 (a = 0 branch) and integrates outwards; the two far-field
    constants C_- and -C_+ generally differ.  As C -> 0- the family
    degenerates to the finite-interface profile.
    """
    if settings is None:
        settings = OdeSettings()
    if z0 <= 0 or C >= 0:
        raise ValueError("need z0 > 0 and C < 0")
    if z_max is None:
        z_max = z0 + 30.0
    ode = _profile_ode(0.0, settings.nu, "blowup")

    def seed(s):
        return np.array([C * s + (z0 / 18.0) * s * s + s ** 3 / 72.0,
                         C + (z0 / 9.0) * s + s * s / 24.0,
                         z0 / 9.0 + s / 12.0])

    d = INTERFACE_OFFSET
    back = integrate(ode, seed(-d), (z0 - d, z_min - dz), settings)
    if back.termination is not Termination.REACHED_END:
        raise BlowupDetectedError(
            f"backward orbit left the bounded regime "
            f"({back.termination.value})")
    fwd = integrate(ode, seed(d), (z0 + d, z_max + dz), settings)
    fwd_end = z_max
    if fwd.termination is not Termination.REACHED_END:
        # for small |C| the forward branch dies at a secondary zero of g
        # (the family degenerates to the finite-interface profile); keep
        # the resolved part, but an unbounded escape is still an error
        try:
            is_cubic = (_classify_failure(fwd, settings).classification
                        is Classification.CUBIC_GROWTH)
        except UnclassifiedSingularityError:
            is_cubic = False
        if is_cubic:
            raise BlowupDetectedError("forward orbit left the bounded regime")
        fwd_end = fwd.final_time - d

    zb = np.arange(z_min, z0 - d, dz)
    gb = back.sample(zb)[:, 0]
    zf = np.arange(z0 + d, fwd_end, dz)
    gf = fwd.sample(zf)[:, 0]
    z = np.concatenate([zb, [z0], zf])
    g = np.concatenate([gb, [0.0], gf])
    prof = Profile(z=z, g=g, params=SimilarityParams(0.0, "blowup"),
                   classification=Classification.BOUNDED_OSCILLATORY)
    try:
        prof.far_limit = estimate_far_field_limit(prof)
    except InsufficientTailError:
        prof.far_limit = None
    return prof


@dataclass(frozen=True)
class SingularityReport:
    classification: Classification
    coefficient: float
    z0: Optional[float]
    rel_residual: float


def detect_singularity(z, g) -> SingularityReport:
    """Classify the local behaviour of an orbit segment.

    Tried in order: cubic far-field growth g ~ z^3/60 (when |g| is large and
    growing), then g ~ C sqrt(z - z0) (lower contact order), then quadratic
    interface contact g ~ A (z - z0)^2.
    """
    z = np.asarray(z, dtype=float)
    g = np.asarray(g, dtype=float)
    if z.size < 6:
        raise UnclassifiedSingularityError("need at least 6 samples")

    big = np.max(np.abs(g))
    far_end = np.argmax(np.abs(z))
    if big > 10.0 and abs(g[far_end]) > 0.9 * big:
        ratio = g / z ** 3
        last = ratio[np.argsort(np.abs(z))[-max(4, z.size // 4):]]
        dev = np.max(np.abs(last - 1.0 / 60.0)) * 60.0
        if dev < 0.05:
            return SingularityReport(Classification.CUBIC_GROWTH,
                                     float(np.mean(last)), None, float(dev))

    # approach side: samples nearest the vanishing end, one-signed
    order = np.argsort(np.abs(g))
    sel = np.sort(order[:max(6, z.size // 2)])
    zs, gs = z[sel], np.abs(g[sel])

    # sqrt model: g^2 linear in z
    A = np.vstack([zs, np.ones_like(zs)]).T
    coef, *_ = np.linalg.lstsq(A, gs ** 2, rcond=None)
    fit = A @ coef
    scale = np.max(gs ** 2)
    res_sqrt = float(np.max(np.abs(fit - gs ** 2)) / scale) if scale > 0 else 1.0
    if coef[0] != 0.0 and res_sqrt < 0.02:
        slope = abs(coef[0])
        return SingularityReport(Classification.SQRT_SINGULARITY,
                                 float(np.sqrt(slope)),
                                 float(-coef[1] / coef[0]), res_sqrt)

    # quadratic contact: sqrt(g) linear in z
    root = np.sqrt(gs)
    coef2, *_ = np.linalg.lstsq(A, root, rcond=None)
    fit2 = A @ coef2
    scale2 = np.max(root)
    res_quad = float(np.max(np.abs(fit2 - root)) / scale2) if scale2 > 0 else 1.0
    if coef2[0] != 0.0 and res_quad < 0.02:
        return SingularityReport(Classification.FINITE_INTERFACE,
                                 float(coef2[0] ** 2),
                                 float(-coef2[1] / coef2[0]), res_quad)

    raise UnclassifiedSingularityError(
        f"no local model fits (sqrt {res_sqrt:.3g}, quad {res_quad:.3g})")


def reflect_to_rarefaction(p: Profile) -> Profile:
    """Reflected profile g(-z) on the opposite branch.

    If g solves the blow-up branch equation then g(-z) solves the
    rarefaction branch one (and vice versa), for every alpha; reflecting
    twice returns the original profile.
    """
    other = "rarefaction" if p.params.branch == "blowup" else "blowup"
    z = -p.z[::-1].copy()
    g = p.g[::-1].copy()
    params = replace(p.params, branch=other)
    far = None
    z0 = None
    if p.classification is Classification.FINITE_INTERFACE:
        far = 0.0
        z0 = None if p.interface_z0 is None else -p.interface_z0
    elif p.far_limit is not None and abs(p.z[0] + p.z[-1]) < 1e-9:
        # odd anti-symmetric profile: the reflected left tail is -far_limit
        far = -p.far_limit
    slope = None if p.origin_slope is None else -p.origin_slope
    return Profile(z=z, g=g, params=params, origin_slope=slope,
                   far_limit=far, interface_z0=z0,
                   classification=p.classification)


def final_time_profile(alpha: float, C_minus: float, C_plus: float,
                       x: float) -> float:
    """Limit profile C_-|x|^e (x<0) / C_+|x|^e (x>0) with e = 3a/(1+a).

    For a in (-1/10, 0) the exponent is negative and the profile is an
    unbounded shock, singular at the origin.
    """
    if alpha == -1.0:
        raise ValueError("exponent undefined at alpha = -1")
    if alpha <= ALPHA_CRITICAL:
        raise ValueError("no bounded-orbit final-time profile below the "
                         "critical exponent")
    e = 3.0 * alpha / (1.0 + alpha)
    if x == 0.0:
        if e < 0.0:
            raise SingularAtOriginError("profile diverges at x = 0")
        if e == 0.0:
            return 0.5 * (C_minus + C_plus)
        return 0.0
    coeff = C_minus if x < 0 else C_plus
    return coeff * abs(x) ** e
