"""Shared fixtures: backgrounds, modes, cached radial solutions and grids."""

import numpy as np
import pytest

from quasilocal import (
    AnchorBoundary,
    AxialMode,
    BackgroundParams,
    SphereGrid,
    a_profile,
    integrate_wave,
)


@pytest.fixture(scope="session")
def bg_flat():
    return BackgroundParams(m=0.0)


@pytest.fixture(scope="session")
def bg_unit():
    return BackgroundParams(m=1.0)


@pytest.fixture(scope="session")
def mode_l2():
    return AxialMode(ell=2, sigma=0.5)


@pytest.fixture(scope="session")
def grid16():
    return SphereGrid.for_band_limit(16)


@pytest.fixture(scope="session")
def axial_solution(bg_unit, mode_l2):
    """Reference axial solution anchored mid-range, covering r in [20, 80]."""
    return integrate_wave(
        bg_unit,
        mode_l2,
        AnchorBoundary(z=0.0, dz=1.0, r=30.0),
        (20.0, 80.0),
        tol=1e-12,
    )


@pytest.fixture(scope="session")
def axial_profile(axial_solution):
    return a_profile(axial_solution)


def random_harmonic(l_max: int, seed: int):
    """Seeded random coefficients over the full (l, m) range."""
    from quasilocal import HarmonicField

    rng = np.random.default_rng(seed)
    h = HarmonicField.zeros(l_max)
    for l in range(l_max + 1):
        for m in range(-l, l + 1):
            h.coeffs[l, l_max + m] = rng.normal()
    return h
