"""Shared fixtures: the expensive reference objects are built once per
session and reused across test modules."""

import numpy as np
import pytest

from nde_lab.exact_solutions import build_saw
from nde_lab.ode_core import OdeSettings
from nde_lab.similarity_profiles import (
    interface_profile,
    shoot_profile,
    solve_heaviside,
)


@pytest.fixture(scope="session")
def settings():
    return OdeSettings()


@pytest.fixture(scope="session")
def s_minus(settings):
    """Shock profile with far-field value 1, resolved to z = -60."""
    return shoot_profile(0.0, 1.0, settings, z_min=-60.0)


@pytest.fixture(scope="session")
def saw12():
    return build_saw(1.0, 12)


@pytest.fixture(scope="session")
def heaviside_solution(settings):
    return solve_heaviside(settings)


@pytest.fixture(scope="session")
def interface_z0_1(settings):
    return interface_profile(0.0, 1.0, settings, z_min=-40.0)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
