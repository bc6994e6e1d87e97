import numpy as np
import pytest

from lightcone import AXISYM_TRUNCATED, FULL_SPHERE, build_grid


@pytest.fixture(scope="session")
def full_grid():
    """Default full-sphere grid, shared (grids are immutable)."""
    return build_grid(FULL_SPHERE, 64, 128)


@pytest.fixture(scope="session")
def axi_grid():
    """Axisymmetric zone [0.2, pi] at the acceptance resolution."""
    return build_grid(AXISYM_TRUNCATED, 256, 1, 0.2)


@pytest.fixture(scope="session")
def small_full_grid():
    return build_grid(FULL_SPHERE, 32, 64)


def conformal_factor_exact(theta):
    return 2.0 / (1.0 - np.cos(theta))
