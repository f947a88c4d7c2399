import numpy as np
import pytest

from adaptdyn import (
    DnaParams,
    build_dna_coefficients,
    default_quadrature,
    make_grid,
)


@pytest.fixture(scope="session")
def params():
    return DnaParams()


@pytest.fixture(scope="session")
def grid_x():
    return make_grid(10.0, 1001)


@pytest.fixture(scope="session")
def dna_field(params, grid_x):
    """Default damage-cascade field on the desk grid (variable X)."""
    return build_dna_coefficients(
        params, grid_x, default_quadrature(params.gamma_d, ns=12000)
    )


@pytest.fixture(scope="session")
def p_field(grid_x):
    """Heterogeneity-trait field at frozen timing (variable P)."""
    params = DnaParams(variable="P")
    return build_dna_coefficients(
        params, grid_x, default_quadrature(params.gamma_d, ns=12000)
    )


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
