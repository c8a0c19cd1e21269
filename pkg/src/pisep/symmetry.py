"""Permutationally invariant (PI) part of a density matrix.

Two index pairs ``(s, t)`` and ``(s', t')`` are related by a simultaneous
qubit permutation of rows and columns exactly when they have the same
*orbit key* ``(n00, n01, n10, n11)``, the number of qubits whose
(row bit, column bit) equals each pattern. Averaging over all ``N!``
permutations therefore reduces to averaging each entry over its orbit, which
:func:`pi_project` does in ``O(4^N)`` without touching the symmetric group.
"""

from __future__ import annotations

import itertools
import math
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError
from .states import (
    DensityMatrix,
    LocalBasisChange,
    apply_local_basis,
    as_density,
    permute_qubits,
)

PI_TOLERANCE = 1e-9
NAIVE_MAX_QUBITS = 6


def orbit_key(row, col, n_qubits):
    """Return ``(n00, n01, n10, n11)`` for the matrix entry ``(row, col)``."""
    n11 = bin(row & col).count("1")
    n10 = bin(row & ~col).count("1")
    n01 = bin(~row & col & ((1 << n_qubits) - 1)).count("1")
    return n_qubits - n11 - n10 - n01, n01, n10, n11


def orbit_key_index(n01, n10, n11, n_qubits):
    """Flat index of an orbit key; ``n00`` is implied."""
    base = n_qubits + 1
    return (n01 * base + n10) * base + n11


@lru_cache(maxsize=16)
def orbit_index_matrix(n_qubits):
    """``(2^N, 2^N)`` array of flat orbit-key indices, cached per ``N``."""
    dim = 1 << n_qubits
    base = n_qubits + 1
    idx = np.arange(dim, dtype=np.int64)
    pc = np.bitwise_count(idx).astype(np.int32)
    # built in int32 row blocks to keep peak memory near the size of the output
    out = np.empty((dim, dim), dtype=np.int32)
    step = max(1, (1 << 22) // dim)
    for lo in range(0, dim, step):
        rows = idx[lo : lo + step]
        n11 = np.bitwise_count(rows[:, None] & idx[None, :]).astype(np.int32)
        n10 = pc[lo : lo + step, None] - n11
        n01 = pc[None, :] - n11
        out[lo : lo + step] = (n01 * base + n10) * base + n11
    out.setflags(write=False)
    return out


def orbit_means(matrix, n_qubits):
    """Mean of ``matrix`` over each orbit, as a flat table indexed by orbit key."""
    keys = orbit_index_matrix(n_qubits).ravel()
    size = (n_qubits + 1) ** 3
    flat = np.asarray(matrix).ravel()
    counts = np.bincount(keys, minlength=size)
    re = np.bincount(keys, weights=flat.real, minlength=size)
    im = np.bincount(keys, weights=flat.imag, minlength=size)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(counts > 0, (re + 1j * im) / np.maximum(counts, 1), 0.0)


def pi_project(state):
    """PI part of ``state`` by orbit averaging.

    Each output entry is the mean of the input entries sharing its orbit key,
    which equals ``(1/N!) sum_pi P_pi rho P_pi^dagger``.
    """
    rho = as_density(state)
    n = rho.n_qubits
    table = orbit_means(rho.matrix, n)
    out = table[orbit_index_matrix(n)]
    return DensityMatrix._wrap(out)


def _permute_index_bits(indices, perm):
    out = np.zeros_like(indices)
    for q, target in enumerate(perm):
        out |= ((indices >> q) & 1) << target
    return out


def pi_project_naive(state):
    """Literal average over all ``N!`` qubit permutations (verification oracle)."""
    rho = as_density(state)
    n = rho.n_qubits
    if n > NAIVE_MAX_QUBITS:
        raise DimensionError(f"naive PI projection limited to N <= {NAIVE_MAX_QUBITS}, got {n}")
    idx = np.arange(rho.dim)
    acc = np.zeros_like(rho.matrix)
    for perm in itertools.permutations(range(n)):
        p = _permute_index_bits(idx, perm)
        permuted = np.empty_like(rho.matrix)
        permuted[np.ix_(p, p)] = rho.matrix
        acc += permuted
    return DensityMatrix._wrap(acc / math.factorial(n))


def pi_distance(state):
    """Frobenius distance between ``state`` and its PI part."""
    rho = as_density(state)
    return float(np.linalg.norm(rho.matrix - pi_project(rho).matrix))


def is_pi(state, tol=PI_TOLERANCE):
    return pi_distance(state) < tol


def pi_project_in_basis(state, basis):
    """PI part taken in the product basis ``basis``, expressed back in the computational basis.

    Returns ``B^dagger . PI(B rho B^dagger) . B``.
    """
    if not isinstance(basis, LocalBasisChange):
        basis = LocalBasisChange(tuple(basis))
    rotated = pi_project(apply_local_basis(as_density(state), basis))
    return apply_local_basis(rotated, basis.inverse())


def adjacent_transposition_deviation(state):
    """Largest entry-wise change under swapping any pair of neighbouring qubits.

    Adjacent transpositions generate the symmetric group, so a zero result
    certifies permutation invariance.
    """
    rho = as_density(state)
    n = rho.n_qubits
    worst = 0.0
    for q in range(n - 1):
        perm = list(range(n))
        perm[q], perm[q + 1] = perm[q + 1], perm[q]
        swapped = permute_qubits(rho, perm)
        worst = max(worst, float(np.max(np.abs(swapped.matrix - rho.matrix))))
    return worst
