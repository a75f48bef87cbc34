import numpy as np
import pytest

from scatterspin.couplings import CouplingMatrix


def random_symmetric_couplings(n, rng, scale=2.0):
    mat = rng.uniform(-scale, scale, (n, n))
    mat = 0.5 * (mat + mat.T)
    np.fill_diagonal(mat, 0.0)
    return CouplingMatrix(n, mat)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
