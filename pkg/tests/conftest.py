import numpy as np
import pytest

from atmos.grid import grid_for_params, make_grid
from atmos.operators import build_L_coeffs, pure_laplacian_coeffs
from atmos.params import make_params


@pytest.fixture(scope="session")
def p32():
    """The workhorse parameter set gamma = 3/2, R = 2 (N = 6)."""
    return make_params(1.5, 2.0)


@pytest.fixture(scope="session")
def coeffs32(p32):
    return build_L_coeffs(p32)


@pytest.fixture(scope="session")
def grid32_256(p32):
    return grid_for_params(p32, 256)


@pytest.fixture(scope="session")
def grid32_512(p32):
    return grid_for_params(p32, 512)


@pytest.fixture(scope="session")
def pure_n6():
    return pure_laplacian_coeffs(6.0, 1.0)


@pytest.fixture(scope="session")
def unit_grid_n6():
    return make_grid(1024, 6.0, 1.0)


@pytest.fixture()
def rng():
    return np.random.default_rng(20250810)
