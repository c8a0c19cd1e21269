import itertools

import numpy as np
import pytest

from pisep.states import PAULI_MATRICES, DensityMatrix, random_mixed
from pisep.symmetry import pi_project


def kron_all(mats):
    out = np.ones((1, 1), dtype=complex)
    for m in mats:
        out = np.kron(out, m)
    return out


def pauli_matrix(letters):
    return kron_all([PAULI_MATRICES[ch] for ch in letters])


def symmetrized_operator(factors):
    """Explicit sum over all N! orderings of a list of single-qubit factors."""
    n = len(factors)
    total = np.zeros((1 << n, 1 << n), dtype=complex)
    for perm in itertools.permutations(range(n)):
        total += kron_all([factors[i] for i in perm])
    return total


def random_pi_state(n, seed):
    return pi_project(random_mixed(n, seed=seed))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def dm(matrix):
    return DensityMatrix(np.asarray(matrix, dtype=complex))
