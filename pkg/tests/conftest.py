import math

import numpy as np
import pytest

from qheat.baths import BathSpec, ModulationSpec


def random_density(n, rng, rank=None):
    rank = n if rank is None else rank
    z = rng.normal(size=(n, rank)) + 1j * rng.normal(size=(n, rank))
    rho = z @ z.conj().T
    return rho / np.trace(rho).real


def ground(n):
    rho = np.zeros((n, n), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def split_baths(t_cold=0.5, t_hot=1.0, omega0=1.0):
    """Cold bath below omega0, hot bath at and above it."""
    return (
        BathSpec("cold", t_cold, band=(0.0, omega0)),
        BathSpec("hot", t_hot, band=(omega0, math.inf)),
    )


# exp(-1/T) = 1/2 and G(1) = 2 for gamma0 = 1
HALF_T = 1.0 / math.log(2.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def two_sideband():
    return ModulationSpec.two_sideband(0.2)
