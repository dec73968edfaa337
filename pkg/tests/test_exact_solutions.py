import math

import numpy as np
import pytest
from hypothesis import given, settings as hsettings
from hypothesis import strategies as st

from nde_lab.errors import (
    DomainError,
    InsufficientHumpsError,
    ZeroJumpError,
)
from nde_lab.exact_solutions import (
    PiecewiseCubic,
    build_saw,
    invariant_cubic,
    rankine_hugoniot_speed,
    residual,
    saw_envelope_fit,
    tw_solution,
)

SQRT60 = math.sqrt(60.0)


def second_derivative_5pt(f, y, h=1e-3):
    # exact for polynomials up to degree 5
    return (-f(y + 2 * h) + 16 * f(y + h) - 30 * f(y)
            + 16 * f(y - h) - f(y - 2 * h)) / (12 * h * h)


# --- invariant cubics --------------------------------------------------------

def test_invariant_cubic_critical_family(rng):
    g = invariant_cubic("I", C0=0.0, C1=-1.0)
    z = rng.uniform(-20.0, 20.0, 100)
    assert np.max(np.abs(residual(g, -0.1, z))) < 1e-10


def test_invariant_cubic_alpha_minus_one(rng):
    for c2 in (-1.0, 0.3, 2.0):
        g = invariant_cubic("II", C2=c2)
        z = rng.uniform(-20.0, 20.0, 100)
        assert np.max(np.abs(residual(g, -1.0, z))) < 1e-10


def test_invariant_cubic_degenerate_member():
    g = invariant_cubic("II", C2=0.0)
    assert np.allclose(g.coeffs[0], [0.0, 0.0, 0.0, 1.0 / 60.0])


def test_pure_cubic_solves_every_exponent():
    # z^3/60 satisfies the profile equation for all exponents, so the
    # residual vanishes at alpha = 0 as well (direct arithmetic: both sides
    # equal z^3/60)
    g = invariant_cubic("I", C0=0.0, C1=0.0)
    for z in (-2.0, -1.0, 3.0):
        assert abs(residual(g, 0.0, z)) < 1e-14


def test_second_hump_is_wrong_alpha_elsewhere():
    # saw pieces solve only the critical exponent; at alpha = 0 the
    # residual of the first hump is the leftover linear term
    g = invariant_cubic("I", C0=0.0, C1=-1.0)
    z = -2.0
    # residual(alpha) - residual(alpha_c) = (ac - a)(g' z - ... ) checked
    # directly: value at alpha=0 is nonzero
    assert abs(residual(g, 0.0, z)) > 1e-3


def test_residual_matches_hand_expansion(rng):
    # (g g')'' - (1+a)/3 g' z + a g computed symbolically vs by evaluation
    C0, C1 = 0.7, -2.0
    g = invariant_cubic("I", C0=C0, C1=C1)
    for z in rng.uniform(-5.0, 5.0, 20):
        gv = C0 + C1 * z + z ** 3 / 60.0
        gp = C1 + z * z / 20.0
        gpp = z / 10.0
        gppp = 0.1
        lhs = 3.0 * gp * gpp + gv * gppp  # (g g')'' expanded
        for alpha in (-0.1, 0.0, 0.4):
            want = lhs - (1 + alpha) / 3.0 * gp * z + alpha * gv
            assert abs(residual(g, alpha, z) - want) < 1e-12


# --- saw construction --------------------------------------------------------

def test_saw_first_breakpoint_exact(saw12):
    assert abs(saw12.edges[-2] - (-SQRT60)) < 1e-12
    assert np.allclose(saw12.coeffs[-1], [0.0, -1.0, 0.0, 1.0 / 60.0])


def test_saw_second_hump_coefficients(saw12):
    c = saw12.coeffs[-2]
    assert abs(c[0] - (-4.0 * SQRT60)) < 1e-12
    assert abs(c[1] - (-5.0)) < 1e-12
    assert c[2] == 0.0
    assert abs(c[3] - 1.0 / 60.0) < 1e-18


def test_saw_breakpoint_ratio(saw12):
    rho = saw12.edges[-3] / saw12.edges[-2]
    assert abs(rho - 1.56155) < 1e-5
    assert abs(rho - (math.sqrt(17.0) - 1.0) / 2.0) < 1e-12


def test_saw_zero_and_corner_matching(saw12):
    # at every interior breakpoint: both adjacent cubics vanish and their
    # slopes are exact negatives; the flux (g^2)'' = 2 g'^2 is continuous
    for i, zk in enumerate(saw12.breakpoints):
        left = saw12.coeffs[i]
        right = saw12.coeffs[i + 1]
        gl = left[0] + left[1] * zk + left[3] * zk ** 3
        gr = right[0] + right[1] * zk + right[3] * zk ** 3
        assert abs(gl) < 1e-10 and abs(gr) < 1e-10
        sl = left[1] + 3 * left[3] * zk * zk
        sr = right[1] + 3 * right[3] * zk * zk
        assert abs(sl + sr) < 1e-12
        assert abs(2 * sl * sl - 2 * sr * sr) < 1e-10


def test_saw_piecewise_residual(saw12, rng):
    for i in range(saw12.coeffs.shape[0]):
        lo, hi = saw12.edges[i], saw12.edges[i + 1]
        z = rng.uniform(lo + 1e-6, hi - 1e-6, 10)
        assert np.max(np.abs(residual(saw12, -0.1, z))) < 1e-10


def test_saw_hump_geometry(saw12):
    edges = saw12.edges
    ratios = edges[:-2][::-1] / edges[1:-1][::-1]
    # |z_{k+1}|/|z_k| stays in (1, rho) and decreases towards 1
    rho = (math.sqrt(17.0) - 1.0) / 2.0
    assert np.all(ratios > 1.0) and np.all(ratios <= rho + 1e-12)
    heights = []
    for i in range(saw12.coeffs.shape[0]):
        c = saw12.coeffs[i]
        zs = -math.sqrt(-20.0 * c[1])
        heights.append(c[0] + c[1] * zs + c[3] * zs ** 3)
    heights = heights[::-1]  # innermost hump first
    assert all(b < a for a, b in zip(heights, heights[1:]))


def test_saw_scaling_by_four(saw12):
    saw4 = build_saw(4.0, 12)
    a = 2.0
    assert np.max(np.abs(saw4.edges - a * saw12.edges)) < 1e-10
    scale = np.array([a ** 3, a ** 2, a, 1.0])
    assert np.max(np.abs(saw4.coeffs - saw12.coeffs * scale)) < 1e-10
    _, e1 = saw_envelope_fit(saw12)
    _, e4 = saw_envelope_fit(saw4)
    assert abs(e1 - e4) < 0.01


def test_saw_envelope_exponent(saw12):
    c_env, expo = saw_envelope_fit(saw12)
    assert abs(expo - (-1.0 / 3.0)) < 0.05
    # frozen envelope coefficient for the unit-slope normalization
    assert abs(c_env - 4.8678) < 1e-3


def test_saw_envelope_needs_humps():
    with pytest.raises(InsufficientHumpsError):
        saw_envelope_fit(build_saw(1.0, 4))


# --- travelling waves --------------------------------------------------------

def test_parabola_satisfies_integrated_equation(rng):
    lam, A0, B = -6.0, 0.0, 0.0
    f = tw_solution("parabola", speed=lam, A0=A0, B=B)
    y = rng.uniform(-3.0, 3.0, 50)
    assert np.max(np.abs(f(y) - y ** 2)) < 1e-12
    # -lam f = (f f')' + A0, with (f f')' measured by exact stencils
    for yv in rng.uniform(-2.0, 2.0, 10):
        ffp_prime = second_derivative_5pt(lambda s: 0.5 * f(s) ** 2, yv)
        assert abs(-lam * f(yv) - (ffp_prime + A0)) < 1e-8


def test_sqrt_branch_flux_free():
    f = tw_solution("sqrt_branch", A1=1.0, A2=0.0)
    y = np.linspace(0.5, 4.0, 20)
    assert np.max(np.abs(f(y) - np.sqrt(y))) < 1e-15
    assert np.max(np.abs(f.flux(y) - 0.5)) < 1e-15
    with pytest.raises(DomainError):
        f(np.array([-1.0]))


def test_constant_pair_zero_speed():
    # two constants glued at zero: flux jump vanishes, speed 0
    assert rankine_hugoniot_speed(0.0, -2.0) == 0.0


def test_rh_speed_arithmetic():
    assert rankine_hugoniot_speed(1.0, -2.0) == 0.5
    with pytest.raises(ZeroJumpError):
        rankine_hugoniot_speed(1.0, 0.0)


def test_composite_wave_jump_condition(rng):
    # parabola glued to the constant chosen by the jump condition: the
    # speed recovered from numerically measured jumps matches construction
    lam, A0, B, y0 = 2.0, 0.6, -0.4, 1.3
    f1 = tw_solution("parabola", speed=lam, A0=A0, B=B)
    flux_d1 = second_derivative_5pt(lambda s: 0.5 * f1(s) ** 2, y0)
    c_val = float(f1(y0)) + flux_d1 / lam
    f2 = tw_solution("constant", C=c_val)
    flux_d2 = second_derivative_5pt(lambda s: 0.5 * f2(s) ** 2, y0)
    lam_measured = rankine_hugoniot_speed(flux_d2 - flux_d1,
                                          float(f2(y0)) - float(f1(y0)))
    assert abs(lam_measured - lam) < 1e-10


@given(flux=st.floats(-100, 100), jump=st.floats(-100, -1e-3))
@hsettings(max_examples=50, deadline=None)
def test_rh_speed_scaling_property(flux, jump):
    # doubling both jumps leaves the speed unchanged
    a = rankine_hugoniot_speed(flux, jump)
    b = rankine_hugoniot_speed(2.0 * flux, 2.0 * jump)
    assert math.isclose(a, b, rel_tol=1e-12, abs_tol=1e-12)


def test_piecewise_cubic_evaluation():
    pc = PiecewiseCubic(edges=np.array([-2.0, 0.0, 2.0]),
                        coeffs=np.array([[0.0, 1.0, 0.0, 0.0],
                                         [0.0, -1.0, 0.0, 0.0]]))
    assert pc(-1.0) == -1.0 and pc(1.0) == -1.0
    assert pc.derivative(np.array([-1.0]))[0] == 1.0
    doc = pc.to_json()
    assert doc["edges"] == [-2.0, 0.0, 2.0]
