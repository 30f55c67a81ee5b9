import numpy as np
import pytest

from lapres import build_grid
from lapres.coefficients import identity_field


@pytest.fixture
def grid_small():
    return build_grid(1.0, 1.0, 8, 8)


@pytest.fixture
def grid_medium():
    return build_grid(1.0, 1.0, 32, 16)


@pytest.fixture
def ident(grid_small):
    return identity_field(grid_small, "A"), identity_field(grid_small, "T")


@pytest.fixture
def f_one(grid_small):
    return np.ones(grid_small.n_dofs, dtype=complex)
