import numpy as np
import pytest

from pauliprop import Lattice, build_ansatz, build_hamiltonian, build_singlet_pairing


@pytest.fixture
def small_system():
    """2x2 lattice bundle used across engine tests."""
    lat = Lattice(2, 2)
    return lat, build_hamiltonian(lat, 1.0, 0.8, 0.5), build_singlet_pairing(lat)


def random_params(count: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).uniform(-np.pi, np.pi, count)


@pytest.fixture
def params_for():
    def make(lat: Lattice, depth: int, seed: int = 0) -> np.ndarray:
        circ = build_ansatz(lat, depth)
        return circ, random_params(circ.param_count, seed)

    return make
