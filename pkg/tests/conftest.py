import math

import numpy as np
import pytest

from plasmawave.grid import GridSpec, inverse_transform


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def band_limited_real(grid: GridSpec, rng, kmax: int) -> np.ndarray:
    """Random real field with spectrum supported in |k| <= kmax."""
    spec = np.zeros(grid.num_points, complex)
    act = np.abs(grid.k) <= kmax
    spec[act] = rng.normal(size=act.sum()) + 1j * rng.normal(size=act.sum())
    return inverse_transform(grid, spec).real


def band_limited_complex(grid: GridSpec, rng, kmax: int) -> np.ndarray:
    spec = np.zeros(grid.num_points, complex)
    act = np.abs(grid.k) <= kmax
    spec[act] = rng.normal(size=act.sum()) + 1j * rng.normal(size=act.sum())
    return inverse_transform(grid, spec)


@pytest.fixture
def grid64():
    return GridSpec(64, 2 * math.pi)


@pytest.fixture
def grid256():
    return GridSpec(256, 2 * math.pi)
