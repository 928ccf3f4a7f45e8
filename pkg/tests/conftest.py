import numpy as np
import pytest

from relshock.fluid import EosParams


@pytest.fixture
def eos():
    return EosParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20100326)


def random_states(rng, count, rho_lo=1e-6, rho_hi=1e12, v_max=0.999):
    """Log-uniform densities and uniform velocities over the test sweep."""
    rho = 10.0 ** rng.uniform(np.log10(rho_lo), np.log10(rho_hi), count)
    v = rng.uniform(-v_max, v_max, count)
    return rho, v
