"""Numerical laboratory for the third-order nonlinear dispersion equation
u_t = (u u_x)_xx: similarity-profile shooting, exact piecewise-cubic
solutions, blow-up certificates, and a regularized finite-difference
simulator for the step-data problems."""

from . import (
    blowup_estimates,
    diagnostics,
    errors,
    exact_solutions,
    ode_core,
    pde_simulator,
    similarity_profiles,
    w4_dynamics,
)
from .ode_core import OdeSettings, Termination, Trajectory, find_root, integrate
from .similarity_profiles import (
    ALPHA_CRITICAL,
    Classification,
    Profile,
    SimilarityParams,
    shoot_profile,
    solve_heaviside,
)

__version__ = "0.1.0"

__all__ = [
    "OdeSettings",
    "Termination",
    "Trajectory",
    "integrate",
    "find_root",
    "ALPHA_CRITICAL",
    "Classification",
    "Profile",
    "SimilarityParams",
    "shoot_profile",
    "solve_heaviside",
    "ode_core",
    "similarity_profiles",
    "exact_solutions",
    "w4_dynamics",
    "blowup_estimates",
    "pde_simulator",
    "diagnostics",
    "errors",
    "__version__",
]
