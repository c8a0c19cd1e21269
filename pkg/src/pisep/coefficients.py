"""Coefficient representation of PI states in the symmetrized Pauli basis.

A PI state is written as

    rho = sum_{k+l+m+n=N} e[k,l,m,n] * Pi(X^k Y^l Z^m I^n)

where ``Pi`` sums over all ``N!`` qubit permutations (so each distinct
Pauli string of type ``(k,l,m,n)`` appears ``k! l! m! n!`` times). The table
has ``C(N+3, 3)`` real entries, ``e[0,0,0,N] = 1/(N! 2^N)`` by normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .exceptions import DimensionError, NumericalError, ValidationError
from .states import DensityMatrix, PauliString, as_density, check_n_qubits
from .symmetry import orbit_index_matrix, orbit_key_index, pi_project

DIRECTION_ATOL = 1e-12


@lru_cache(maxsize=None)
def factorial(n):
    return float(math.factorial(n))


@lru_cache(maxsize=64)
def compositions(n_qubits):
    """All ``(k, l, m, n)`` with ``k+l+m+n = N``, in lexicographic order."""
    return tuple(
        (k, l, m, n_qubits - k - l - m)
        for k in range(n_qubits + 1)
        for l in range(n_qubits + 1 - k)
        for m in range(n_qubits + 1 - k - l)
    )


@lru_cache(maxsize=64)
def _composition_index(n_qubits):
    return {c: i for i, c in enumerate(compositions(n_qubits))}


def representative_string(k, l, m, n):
    return PauliString("X" * k + "Y" * l + "Z" * m + "I" * n)


@dataclass(frozen=True, eq=False)
class PICoefficients:
    """Table of ``e[k,l,m,n]`` for one qubit count."""

    n_qubits: int
    values: np.ndarray

    def __post_init__(self):
        n = int(self.n_qubits)
        if n < 1:
            raise DimensionError(f"n_qubits must be >= 1, got {n}")
        values = np.array(self.values, dtype=float)
        if values.shape != (len(compositions(n)),):
            raise ValidationError(
                f"expected {len(compositions(n))} coefficients for N={n}, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "n_qubits", n)
        object.__setattr__(self, "values", values)

    def __getitem__(self, key):
        idx = _composition_index(self.n_qubits).get(tuple(key))
        if idx is None:
            raise KeyError(key)
        return float(self.values[idx])

    def get(self, k, l, m, n):
        """Coefficient lookup that returns 0 for impossible indices."""
        if min(k, l, m, n) < 0 or k + l + m + n != self.n_qubits:
            return 0.0
        return self[(k, l, m, n)]

    def items(self):
        return zip(compositions(self.n_qubits), self.values.tolist())

    @classmethod
    def from_mapping(cls, n_qubits, mapping):
        """Build from ``{(k,l,m,n): e}``; unspecified entries are zero, normalization is filled in."""
        index = _composition_index(n_qubits)
        values = np.zeros(len(index))
        values[index[(0, 0, 0, n_qubits)]] = normalization(n_qubits)
        for key, val in mapping.items():
            key = tuple(int(v) for v in key)
            if key not in index:
                raise ValidationError(f"{key} is not a composition of N={n_qubits}")
            values[index[key]] = val
        return cls(n_qubits, values)

    def to_json(self):
        norm_key = (0, 0, 0, self.n_qubits)
        return {
            "n_qubits": self.n_qubits,
            "coeffs": [
                {"k": k, "l": l, "m": m, "n": n, "e": e}
                for (k, l, m, n), e in self.items()
                if e != 0.0 or (k, l, m, n) == norm_key
            ],
        }

    @classmethod
    def from_json(cls, doc):
        try:
            n = int(doc["n_qubits"])
            mapping = {(c["k"], c["l"], c["m"], c["n"]): float(c["e"]) for c in doc["coeffs"]}
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed coefficient document: {exc}") from exc
        return cls.from_mapping(n, mapping)


def normalization(n_qubits):
    """Value of ``e[0,0,0,N]`` for a unit-trace state."""
    return 1.0 / (factorial(n_qubits) * 2.0**n_qubits)


def string_weight(k, l, m, n):
    """Multiplicity ``k! l! m! n!`` of each distinct string inside ``Pi(...)``."""
    return factorial(k) * factorial(l) * factorial(m) * factorial(n)


def _pi_trace(matrix, k, l, m, n):
    # Tr(rho P) for the representative string of type (k,l,m,n); rho assumed PI
    n_qubits = k + l + m + n
    letters = representative_string(k, l, m, n).letters
    x = y = z = 0
    for pos, ch in enumerate(letters):
        bit = 1 << (n_qubits - 1 - pos)
        if ch == "X":
            x |= bit
        elif ch == "Y":
            y |= bit
        elif ch == "Z":
            z |= bit
    cols = np.arange(1 << n_qubits)
    signs = 1 - 2 * (np.bitwise_count(cols & (y | z)).astype(np.int64) & 1)
    value = (1j**l) * np.sum(matrix[cols, cols ^ (x | y)] * signs)
    return value.real


def coeffs_from_dense(state):
    """Coefficients of the PI part of ``state``.

    ``e[k,l,m,n]`` is ``Tr(rho P) / (k! l! m! n! 2^N)`` averaged over all
    strings ``P`` of that type. The average equals the trace against one
    representative string on the PI part, which is how it is evaluated.
    """
    rho = as_density(state)
    n = rho.n_qubits
    sym = pi_project(rho).matrix
    values = np.array(
        [_pi_trace(sym, *c) / (string_weight(*c) * 2.0**n) for c in compositions(n)]
    )
    return PICoefficients(n, values)


def _binomials(n):
    return np.array([math.comb(n, i) for i in range(n + 1)], dtype=float)


def _orbit_values(coeffs):
    """Matrix-element value of the PI state for every orbit key."""
    n = coeffs.n_qubits
    base = n + 1
    table = np.zeros(base**3, dtype=complex)
    # weighted coefficient grid W[k, l, m] with n = N - k - l - m implied
    grid = np.zeros((base, base, base))
    for (k, l, m, nn), e in coeffs.items():
        grid[k, l, m] = e * string_weight(k, l, m, nn)
    for n01 in range(base):
        for n10 in range(base - n01):
            d = n01 + n10
            # (X + iY)^n10 (X - iY)^n01 -> coefficient of Y^l
            py = np.convolve(
                _binomials(n10) * (1j ** np.arange(n10 + 1)),
                _binomials(n01) * ((-1j) ** np.arange(n01 + 1)),
            )
            for n11 in range(base - d):
                n00 = n - d - n11
                # (I + Z)^n00 (I - Z)^n11 -> coefficient of Z^m
                pz = np.convolve(_binomials(n00), _binomials(n11) * (-1.0) ** np.arange(n11 + 1))
                block = grid[d - np.arange(d + 1), np.arange(d + 1), :][:, : n00 + n11 + 1]
                table[orbit_key_index(n01, n10, n11, n)] = py @ block @ pz
    return table


def dense_from_coeffs(coeffs):
    """Dense PI density matrix with the given coefficients."""
    n = check_n_qubits(coeffs.n_qubits)
    table = _orbit_values(coeffs)
    out = table[orbit_index_matrix(n)]
    herm = np.max(np.abs(out - out.conj().T))
    tr = np.trace(out)
    if herm > 1e-12 or abs(tr - 1.0) > 1e-10:
        raise NumericalError(
            f"coefficients do not describe a unit-trace Hermitian state (trace {tr:.6g})"
        )
    return DensityMatrix._wrap(out)


@dataclass(frozen=True)
class CriterionElements:
    """The four distinct matrix-element values that enter the separability criterion."""

    offdiag: float
    d0: float
    d1: float
    d2: float


def criterion_elements_from_coeffs(coeffs):
    """Single-excitation coherence and the three diagonal populations of a PI state.

    ``offdiag`` is the entry at ``(2^i, 2^j)``, ``d0`` at ``(0, 0)``, ``d1`` at
    ``(2^i, 2^i)`` and ``d2`` at ``(2^i + 2^j, 2^i + 2^j)`` (0-based, ``i != j``).
    """
    n = coeffs.n_qubits
    if n < 2:
        raise DimensionError("criterion elements need N >= 2")
    z = [coeffs.get(0, 0, m, n - m) for m in range(n + 1)]
    off = sum(
        coeffs.get(2, 0, m, n - 2 - m) + coeffs.get(0, 2, m, n - 2 - m) for m in range(n - 1)
    )
    return CriterionElements(
        offdiag=2.0 * factorial(n - 2) * off,
        d0=factorial(n) * sum(z),
        d1=factorial(n - 1) * sum((n - 2 * m) * z[m] for m in range(n + 1)),
        d2=factorial(n - 2) * sum(((n - 2 * m) ** 2 - n) * z[m] for m in range(n + 1)),
    )


def criterion_coefficient_keys(n_qubits):
    """The ``3N-2`` coefficients needed by the criterion (normalization excluded)."""
    n = n_qubits
    keys = [(0, 0, m, n - m) for m in range(1, n + 1)]
    keys += [(2, 0, m, n - m - 2) for m in range(n - 1)]
    keys += [(0, 2, m, n - m - 2) for m in range(n - 1)]
    return keys


def check_direction(direction):
    a, b, c = (float(v) for v in direction)
    if abs(a * a + b * b + c * c - 1.0) > DIRECTION_ATOL:
        raise ValidationError(f"direction {direction} is not a unit vector")
    return a, b, c


def symmetrized_expectation(coeffs, direction, n_identity):
    """``Tr rho Pi(A^(N-n) (x) I^n)`` for ``A = a X + b Y + c Z``."""
    a, b, c = check_direction(direction)
    n_total = coeffs.n_qubits
    if not 0 <= n_identity <= n_total:
        raise ValidationError(f"n_identity={n_identity} outside [0, {n_total}]")
    j = n_total - n_identity
    total = 0.0
    for k in range(j + 1):
        for l in range(j + 1 - k):
            m = j - k - l
            e = coeffs.get(k, l, m, n_identity)
            if e:
                total += e * a**k * b**l * c**m
    return total * factorial(j) * 2.0**n_total * factorial(n_total) * factorial(n_identity)
