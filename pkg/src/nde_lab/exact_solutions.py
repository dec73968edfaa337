"""Closed-form solutions: invariant-subspace cubics, the piecewise-cubic
saw profile at the critical exponent -1/10, travelling waves, and the
jump condition for shock speeds.

The operator (g g')'' maps polynomials of degree <= 3 to polynomials of
degree <= 3, which is what makes every construction here exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
import numpy as np
from numpy.polynomial import polynomial as P

from .errors import (
    DomainError,
    InsufficientHumpsError,
    RootNotFoundError,
    ZeroJumpError,
)
from .ode_core import find_root
from .similarity_profiles import Profile

__all__ = [
    "PiecewiseCubic",
    "TravellingWave",
    "invariant_cubic",
    "residual",
    "build_saw",
    "saw_envelope_fit",
    "tw_solution",
    "rankine_hugoniot_speed",
]

SAW_ALPHA = -0.1  # exponent at which piecewise cubics solve the profile ODE


@dataclass(frozen=True)
class PiecewiseCubic:
    """Contiguous cubic pieces; each row of ``coeffs`` is (C0, C1, C2, C3)
    for C0 + C1 z + C2 z^2 + C3 z^3 on [edges[i], edges[i+1]]."""

    edges: np.ndarray       # length npieces + 1, strictly increasing
    coeffs: np.ndarray      # shape (npieces, 4)

    def __post_init__(self):
        object.__setattr__(self, "edges", np.asarray(self.edges, dtype=float))
        object.__setattr__(self, "coeffs",
                           np.asarray(self.coeffs, dtype=float))
        if self.coeffs.shape != (self.edges.size - 1, 4):
            raise ValueError("coeffs must have one row per piece")
        finite = self.edges[np.isfinite(self.edges)]
        if np.any(np.diff(finite) <= 0):
            raise ValueError("edges must be strictly increasing")

    @property
    def breakpoints(self) -> np.ndarray:
        """Interior piece boundaries (the zeros z_k for saw profiles)."""
        return self.edges[1:-1]

    def piece_index(self, z):
        idx = np.searchsorted(self.edges, z, side="right") - 1
        return np.clip(idx, 0, self.coeffs.shape[0] - 1)

    def __call__(self, z):
        z = np.asarray(z, dtype=float)
        idx = self.piece_index(z)
        c = self.coeffs[idx]
        return ((c[..., 3] * z + c[..., 2]) * z + c[..., 1]) * z + c[..., 0]

    def derivative(self, z, order: int = 1):
        z = np.asarray(z, dtype=float)
        idx = self.piece_index(z)
        out = np.zeros_like(z, dtype=float)
        for i in np.unique(idx):
            m = idx == i
            dc = P.polyder(self.coeffs[i], m=order)
            out[m] = P.polyval(z[m], dc)
        return out

    def to_json(self, path=None):
        doc = {
            "edges": [float(v) for v in self.edges],
            "coefficients": [[float(c) for c in row] for row in self.coeffs],
        }
        if path is None:
            return doc
        with open(path, "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return doc


def invariant_cubic(kind: str, C0: float = 0.0, C1: float = 0.0,
                    C2: float = 0.0) -> PiecewiseCubic:
    """Single-cubic exact solutions of the profile equation.

    Kind "I" (exponent -1/10):  g = C0 + C1 z + z^3/60, C0 and C1 free.
    Kind "II" (exponent -1):    g = 400/3 C2^3 + 20 C2^2 z + C2 z^2 + z^3/60.
    """
    if kind == "I":
        coeffs = [[C0, C1, 0.0, 1.0 / 60.0]]
    elif kind == "II":
        coeffs = [[400.0 / 3.0 * C2 ** 3, 20.0 * C2 ** 2, C2, 1.0 / 60.0]]
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return PiecewiseCubic(edges=np.array([-np.inf, np.inf]),
                          coeffs=np.array(coeffs))


def _cubic_residual_poly(coeffs, alpha):
    """Residual polynomial (g g')'' - (1+a)/3 g' z + a g for one piece."""
    g = np.asarray(coeffs, dtype=float)
    gp = P.polyder(g)
    lhs = P.polyder(P.polymul(g, gp), m=2)
    zgp = np.concatenate([[0.0], gp])  # coefficients of z * g'(z)
    res = P.polysub(lhs, (1.0 + alpha) / 3.0 * zgp)
    return P.polyadd(res, alpha * g)


def residual(g, alpha: float, z):
    """Pointwise residual of the blow-up branch profile equation.

    ``g`` may be a :class:`PiecewiseCubic` (exact polynomial arithmetic) or
    a sampled :class:`Profile` (centered finite differences on its grid, in
    which case ``z`` snaps to the nearest grid point).
    """
    z_in = np.asarray(z, dtype=float)
    scalar = z_in.ndim == 0
    zq = np.atleast_1d(z_in)

    if isinstance(g, PiecewiseCubic):
        idx = g.piece_index(zq)
        out = np.zeros_like(zq, dtype=float)
        for i in np.unique(idx):
            m = idx == i
            res = _cubic_residual_poly(g.coeffs[i], alpha)
            out[m] = P.polyval(zq[m], res)
        return float(out[0]) if scalar else out

    prof = g
    zg, gg = prof.z, prof.g
    h = np.diff(zg)
    if np.max(h) - np.min(h) > 1e-9 * np.max(h):
        raise ValueError("finite-difference residual needs a uniform grid")
    h = float(np.mean(h))
    f = gg * _central_d1(gg, h)           # g g'
    lhs = _central_d1(_central_d1(f, h), h)
    gp = _central_d1(gg, h)
    res = lhs - (1.0 + alpha) / 3.0 * gp * zg + alpha * gg
    idx = np.clip(np.searchsorted(zg, zq), 2, zg.size - 3)
    out = res[idx]
    return float(out[0]) if scalar else out


def _central_d1(y, h):
    d = np.empty_like(y)
    d[1:-1] = (y[2:] - y[:-2]) / (2.0 * h)
    d[0] = (y[1] - y[0]) / h
    d[-1] = (y[-1] - y[-2]) / h
    return d


def build_saw(m: float, num_humps: int = 12) -> PiecewiseCubic:
    """Piecewise-cubic weak solution at the critical exponent, slope -m at 0.

    Hump k+1 is obtained from hump k by requiring g(z_k) = 0 and the
    symmetric-corner condition g'(z_k+) = -g'(z_k-); both pieces are members
    of the two-parameter family C0 + C1 z + z^3/60, so the profile solves
    the equation in the piecewise sense with continuous flux (g^2)''.
    The m = 1 saw is built first; general m follows by the a = sqrt(m)
    scaling.
    """
    if m <= 0:
        raise ValueError("slope normalization m must be positive")
    if num_humps < 1:
        raise ValueError("need at least one hump")

    edges = [0.0]
    rows = []
    C0, C1 = 0.0, -1.0
    zk = -math.sqrt(60.0)
    edges.append(zk)
    rows.append([C0, C1, 0.0, 1.0 / 60.0])

    for _ in range(num_humps - 1):
        slope = C1 + zk * zk / 20.0          # g'(z_k) of the current hump
        C1 = -slope - zk * zk / 20.0         # corner: reverse the slope
        C0 = -(C1 * zk + zk ** 3 / 60.0)     # pin the zero at z_k

        def cubic(zz, C0=C0, C1=C1):
            return C0 + C1 * zz + zz ** 3 / 60.0

        # bracket the next zero strictly left of z_k; g > 0 inside the hump
        step = 0.05 * abs(zk)
        lo = zk - step
        while cubic(lo) > 0.0:
            lo -= step
            if lo < 20.0 * zk:
                raise RootNotFoundError(
                    f"no admissible zero left of z = {zk}")
        zk = find_root(cubic, (lo, lo + step), tol=1e-13 * max(1.0, abs(zk)))
        edges.append(zk)
        rows.append([C0, C1, 0.0, 1.0 / 60.0])

    edges = np.array(edges[::-1])
    rows = np.array(rows[::-1])
    saw = PiecewiseCubic(edges=edges, coeffs=rows)
    if m != 1.0:
        a = math.sqrt(m)
        saw = PiecewiseCubic(
            edges=a * saw.edges,
            coeffs=saw.coeffs * np.array([a ** 3, a ** 2, a, 1.0]))
    return saw


def saw_envelope_fit(saw: PiecewiseCubic) -> tuple[float, float]:
    """Least-squares power law h ~ C_env |z|^exponent through hump peaks."""
    n = saw.coeffs.shape[0]
    if n < 8:
        raise InsufficientHumpsError(f"{n} humps; need at least 8")
    zs, hs = [], []
    for i in range(n):
        c0, c1, _, _ = saw.coeffs[i]
        if c1 >= 0:
            continue
        zstar = -math.sqrt(-20.0 * c1)
        if saw.edges[i] <= zstar <= saw.edges[i + 1]:
            zs.append(abs(zstar))
            hs.append(c0 + c1 * zstar + zstar ** 3 / 60.0)
    zs = np.asarray(zs)
    hs = np.asarray(hs)
    if zs.size < 8:
        raise InsufficientHumpsError("fewer than 8 resolved peaks")
    slope, intercept = np.polyfit(np.log(zs), np.log(hs), 1)
    return float(np.exp(intercept)), float(slope)


@dataclass(frozen=True)
class TravellingWave:
    """Explicit travelling-wave solution u(x, t) = f(x - speed * t)."""

    kind: str                 # constant | sqrt_branch | parabola
    speed: float
    A0: float
    params: tuple

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            (c,) = self.params
            return np.full_like(y, c)
        if self.kind == "sqrt_branch":
            a1, a2 = self.params
            arg = a1 * y + a2
            if np.any(arg < 0):
                raise DomainError("sqrt branch evaluated at negative argument")
            return np.sqrt(arg)
        b, = self.params
        return -(self.speed / 6.0) * (y + b) ** 2 - 1.5 * self.A0 / self.speed

    def flux(self, y):
        """f f' evaluated analytically (its derivative enters the jump
        condition)."""
        y = np.asarray(y, dtype=float)
        if self.kind == "constant":
            return np.zeros_like(y)
        if self.kind == "sqrt_branch":
            a1, _ = self.params
            return np.full_like(y, 0.5 * a1)
        b, = self.params
        lam = self.speed
        return (lam ** 2 / 18.0) * (y + b) ** 3 + 0.5 * self.A0 * (y + b)


def tw_solution(kind: str, **params) -> TravellingWave:
    """Build one of the explicit travelling-wave families.

    constant:     value C; speed and integration constant are zero.
    sqrt_branch:  f = sqrt(A1 y + A2); requires speed = A0 = 0.
    parabola:     f = -(speed/6)(y + B)^2 - 3 A0/(2 speed); speed != 0.
    """
    if kind == "constant":
        return TravellingWave("constant", 0.0, 0.0, (params["C"],))
    if kind == "sqrt_branch":
        return TravellingWave("sqrt_branch", 0.0, 0.0,
                              (params["A1"], params.get("A2", 0.0)))
    if kind == "parabola":
        lam = params["speed"]
        if lam == 0.0:
            raise ValueError("parabola family requires nonzero speed")
        return TravellingWave("parabola", lam, params.get("A0", 0.0),
                              (params.get("B", 0.0),))
    raise ValueError(f"unknown travelling-wave kind {kind!r}")


def rankine_hugoniot_speed(flux_jump: float, value_jump: float) -> float:
    """Shock speed from the jump condition: speed = -[(ff')'] / [f]."""
    if value_jump == 0.0:
        raise ZeroJumpError("value jump must be nonzero")
    return -flux_jump / value_jump
