import math

import numpy as np
import pytest

from fqlab.states import FirstQuantizedState, antisymmetrize


def random_orthonormal(n, eta, seed):
    """Columns of the Q factor of a random complex Gaussian matrix."""
    rng = np.random.default_rng(seed)
    mat = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, _ = np.linalg.qr(mat)
    return q[:, :eta]


def random_antisymmetric_state(n_orbitals, eta, seed):
    """Antisymmetrized random dense state (not generally a determinant)."""
    rng = np.random.default_rng(seed)
    n = max(1, math.ceil(math.log2(n_orbitals)))
    tensor = np.zeros((2 ** n,) * eta, dtype=complex)
    core = rng.normal(size=(n_orbitals,) * eta) + 1j * rng.normal(size=(n_orbitals,) * eta)
    tensor[(slice(0, n_orbitals),) * eta] = core
    tensor /= np.linalg.norm(tensor)
    return antisymmetrize(FirstQuantizedState(eta, n_orbitals, tensor))


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
