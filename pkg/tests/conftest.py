import sys

import numpy as np
import pytest

from samplerec.spectral import DomainGrid, SpectralModel
from samplerec.zoo import fourier_sobolev


def cosine_model(grid_size=64):
    """sigma = (1, 1/2) with b_0 = 1 and b_1 = sqrt(2) cos(2 pi x)."""
    grid = DomainGrid.uniform(grid_size)
    x = grid.nodes
    basis = np.stack([np.ones_like(x), np.sqrt(2) * np.cos(2 * np.pi * x)], axis=1)
    return SpectralModel(np.array([1.0, 0.5]), basis, grid, rank_exact=True)


def geometric_model(sigma=(1.0, 0.5, 0.25), grid_size=8):
    from samplerec.zoo import fourier_basis
    grid = DomainGrid.uniform(grid_size)
    return SpectralModel(np.array(sigma), fourier_basis(grid.nodes, len(sigma)), grid)


@pytest.fixture(scope="session")
def sobolev():
    return fourier_sobolev(1.0, 0.0, 256, 512)


@pytest.fixture(scope="session")
def small_sobolev():
    return fourier_sobolev(1.0, 0.0, 32, 64)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULT_LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
