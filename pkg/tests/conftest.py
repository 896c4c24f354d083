import numpy as np
import pytest

from photonops import FockSuperposition, SpaceLayout

INV_SQRT2 = 2**-0.5


@pytest.fixture
def layout6():
    return SpaceLayout(6)


@pytest.fixture
def fock12():
    """(|1> + |2>)/sqrt(2), the reference two-Fock superposition."""
    return FockSuperposition(((1, INV_SQRT2), (2, INV_SQRT2)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240815)


def random_density_matrix(rng, dim, rank=None):
    rank = rank or dim
    a = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
