"""Shared fixtures: array geometries and angle grids."""

import numpy as np
import pytest

import beamforge as bf


@pytest.fixture(scope="session")
def cfg():
    """Default 16 x 16 half-wavelength URA with 2 RF chains."""
    return bf.ArrayConfig.default()


@pytest.fixture(scope="session")
def small_cfg():
    """4 x 4 URA, cheap enough for brute-force oracles."""
    return bf.ArrayConfig.half_wavelength(4, 4, n_rf=2)


@pytest.fixture(scope="session")
def grid():
    """Standard 180 x 180 one-degree grid."""
    return bf.default_grid()


@pytest.fixture(scope="session")
def coarse_grid():
    """Sparse 12 x 14 grid for fast loss/gradient sweeps."""
    return bf.AngleGrid(
        np.linspace(10.0, 170.0, 12), np.linspace(-80.0, 85.0, 14)
    )
