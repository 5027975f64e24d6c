import numpy as np
import pytest

from gpbox.spectral import Grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def grid1d():
    return Grid(1, 64, 2 * np.pi * 4)


@pytest.fixture
def grid2d():
    return Grid(2, 16, 10.0)


@pytest.fixture
def grid3d():
    return Grid(3, 8, 2 * np.pi)
