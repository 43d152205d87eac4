import numpy as np
import pytest

from phasenoise.baths import BathMode, DiscreteBath
from phasenoise.exact import SystemSpec


def random_bath(rng, n_modes=5, thermal=False):
    modes = []
    for _ in range(n_modes):
        g = 0.3 * rng.uniform(0.2, 1.0) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        beta = 0j if thermal else rng.uniform(0, 1) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        modes.append(BathMode(rng.uniform(0.5, 3.0), g, rng.uniform(0, 1), beta))
    return DiscreteBath(tuple(modes))


@pytest.fixture
def rng():
    return np.random.default_rng(20261018)


@pytest.fixture
def qubit():
    return SystemSpec([0.0, 1.0], [1.0, -1.0])


@pytest.fixture
def qutrit():
    return SystemSpec([0.0, 0.7, 1.3], [1.0, 0.0, -1.0])


def plus_state(d):
    psi = np.ones(d) / np.sqrt(d)
    return np.outer(psi, psi.conj()).astype(complex)


def random_density(rng, d):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    rho = a @ a.conj().T
    return rho / np.trace(rho).real
