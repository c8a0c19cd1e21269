"""Dense N-qubit states, standard constructors, and basic operations.

Conventions
-----------
Qubit ``i`` is bit ``i`` of a computational-basis index, so qubit 0 is the
least significant bit. Ket labels and Pauli strings are written the way
``np.kron`` composes them: the leftmost character belongs to qubit ``N-1``.
With this convention the single-excitation state with qubit ``i`` flipped
sits at index ``2**i``, and ``|01>`` is index 1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .exceptions import DimensionError, NumericalError, ValidationError

MAX_DENSE_QUBITS = 12
STATE_ATOL = 1e-12
PSD_ATOL = 1e-10

PAULI_LETTERS = "IXYZ"
PAULI_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def check_n_qubits(n_qubits, max_qubits=MAX_DENSE_QUBITS, min_qubits=1):
    """Validate a qubit count and return it as ``int``."""
    if isinstance(n_qubits, bool) or int(n_qubits) != n_qubits:
        raise DimensionError(f"n_qubits must be an integer, got {n_qubits!r}")
    n_qubits = int(n_qubits)
    if not min_qubits <= n_qubits <= max_qubits:
        raise DimensionError(
            f"n_qubits={n_qubits} outside supported range [{min_qubits}, {max_qubits}]"
        )
    return n_qubits


def _n_from_dim(dim):
    n = int(dim).bit_length() - 1
    if n < 1 or 1 << n != dim:
        raise DimensionError(f"dimension {dim} is not a power of two >= 2")
    return check_n_qubits(n)


def _readonly(array):
    array = np.array(array, dtype=complex)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized state vector on ``n_qubits`` qubits."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.ndim != 1:
            raise ValidationError("amplitudes must be a 1-d vector")
        _n_from_dim(amps.shape[0])
        norm = np.vdot(amps, amps).real
        if abs(norm - 1.0) > STATE_ATOL:
            raise ValidationError(f"state is not normalized: <psi|psi> = {norm!r}")
        object.__setattr__(self, "amplitudes", _readonly(amps))

    @property
    def n_qubits(self):
        return self.amplitudes.shape[0].bit_length() - 1

    @property
    def dim(self):
        return self.amplitudes.shape[0]

    def to_density(self):
        return DensityMatrix._wrap(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace operator on ``n_qubits`` qubits.

    Hermiticity and trace are always validated. Positive semidefiniteness is
    only checked when ``check_psd=True`` (used for externally loaded data).
    """

    matrix: np.ndarray
    check_psd: bool = False

    def __post_init__(self):
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError("density matrix must be square")
        _n_from_dim(mat.shape[0])
        herm_err = np.max(np.abs(mat - mat.conj().T))
        if herm_err > STATE_ATOL:
            raise ValidationError(f"matrix is not Hermitian (max deviation {herm_err:.3g})")
        tr = np.trace(mat)
        if abs(tr - 1.0) > STATE_ATOL:
            raise ValidationError(f"trace is {tr!r}, expected 1")
        if self.check_psd:
            lowest = np.linalg.eigvalsh(mat)[0]
            if lowest < -PSD_ATOL:
                raise ValidationError(f"matrix is not positive semidefinite (eigenvalue {lowest:.3g})")
        object.__setattr__(self, "matrix", _readonly(mat))

    @classmethod
    def _wrap(cls, matrix):
        # Internal constructor: the caller guarantees the invariants.
        obj = object.__new__(cls)
        object.__setattr__(obj, "matrix", _readonly(matrix))
        object.__setattr__(obj, "check_psd", False)
        return obj

    @property
    def n_qubits(self):
        return self.matrix.shape[0].bit_length() - 1

    @property
    def dim(self):
        return self.matrix.shape[0]

    def purity(self):
        """Tr(rho^2)."""
        return float(np.sum(np.abs(self.matrix) ** 2))

    def eigenvalues(self):
        return np.linalg.eigvalsh(self.matrix)


def as_density(state):
    """Return ``state`` as a :class:`DensityMatrix` (pure states are converted)."""
    if isinstance(state, DensityMatrix):
        return state
    if isinstance(state, PureState):
        return state.to_density()
    raise ValidationError(f"expected PureState or DensityMatrix, got {type(state).__name__}")


@dataclass(frozen=True)
class PauliString:
    """Tensor product of single-qubit Paulis, written MSB-first."""

    letters: str

    def __post_init__(self):
        letters = self.letters.upper()
        if not letters or any(ch not in PAULI_LETTERS for ch in letters):
            raise ValidationError(f"invalid Pauli string {self.letters!r}")
        object.__setattr__(self, "letters", letters)

    def __len__(self):
        return len(self.letters)

    def on_qubit(self, qubit):
        return self.letters[len(self.letters) - 1 - qubit]

    @property
    def type_signature(self):
        """Counts ``(k, l, m, n)`` of X, Y, Z and I letters."""
        return tuple(self.letters.count(ch) for ch in "XYZI")

    def masks(self):
        """Bit masks of the qubits carrying X, Y and Z."""
        x = y = z = 0
        for q in range(len(self.letters)):
            ch = self.on_qubit(q)
            if ch == "X":
                x |= 1 << q
            elif ch == "Y":
                y |= 1 << q
            elif ch == "Z":
                z |= 1 << q
        return x, y, z

    def to_matrix(self):
        out = np.ones((1, 1), dtype=complex)
        for ch in self.letters:
            out = np.kron(out, PAULI_MATRICES[ch])
        return out


def pauli_strings_of_type(k, l, m, n):
    """Yield every distinct PauliString with the given letter counts."""
    pool = "X" * k + "Y" * l + "Z" * m + "I" * n
    for perm in sorted(set(itertools.permutations(pool))):
        yield PauliString("".join(perm))


@dataclass(frozen=True, eq=False)
class LocalBasisChange:
    """Product unitary ``U_0 (x) ... (x) U_{N-1}``; ``unitaries[i]`` acts on qubit ``i``."""

    unitaries: tuple

    def __post_init__(self):
        mats = []
        for i, u in enumerate(self.unitaries):
            u = np.asarray(u, dtype=complex)
            if u.shape != (2, 2):
                raise ValidationError(f"factor {i} is not 2x2")
            if np.max(np.abs(u.conj().T @ u - np.eye(2))) > STATE_ATOL:
                raise ValidationError(f"factor {i} is not unitary")
            mats.append(_readonly(u))
        if not mats:
            raise ValidationError("at least one factor is required")
        object.__setattr__(self, "unitaries", tuple(mats))

    @property
    def n_qubits(self):
        return len(self.unitaries)

    @classmethod
    def identity(cls, n_qubits):
        return cls(tuple(np.eye(2) for _ in range(n_qubits)))

    @classmethod
    def from_euler(cls, angles):
        """Build from an ``(N, 3)`` array of ZYZ Euler angles."""
        return cls(tuple(euler_unitary(*row) for row in np.asarray(angles, dtype=float)))

    def to_matrix(self):
        out = np.ones((1, 1), dtype=complex)
        for u in reversed(self.unitaries):
            out = np.kron(out, u)
        return out

    def inverse(self):
        return LocalBasisChange(tuple(u.conj().T for u in self.unitaries))


def euler_unitary(alpha, beta, gamma):
    """``Rz(alpha) Ry(beta) Rz(gamma)``."""
    ca, sa = np.exp(-0.5j * alpha), np.exp(0.5j * alpha)
    cg, sg = np.exp(-0.5j * gamma), np.exp(0.5j * gamma)
    c, s = np.cos(beta / 2), np.sin(beta / 2)
    return np.array(
        [[ca * c * cg, -ca * s * sg], [sa * s * cg, sa * c * sg]],
        dtype=complex,
    )


# ---------------------------------------------------------------- constructors


def make_ghz(n_qubits):
    n = check_n_qubits(n_qubits)
    amps = np.zeros(1 << n, dtype=complex)
    amps[0] = amps[-1] = 1 / np.sqrt(2)
    return PureState(amps)


def make_w(n_qubits):
    n = check_n_qubits(n_qubits)
    amps = np.zeros(1 << n, dtype=complex)
    amps[[1 << i for i in range(n)]] = 1 / np.sqrt(n)
    return PureState(amps)


def make_product(kets):
    """Tensor product of single-qubit kets; ``kets[i]`` is qubit ``i``.

    An integer ``N`` is shorthand for ``|0>^N``.
    """
    if isinstance(kets, (int, np.integer)):
        n = check_n_qubits(kets)
        kets = [np.array([1, 0])] * n
    check_n_qubits(len(kets))
    amps = np.ones(1, dtype=complex)
    for ket in reversed(kets):
        ket = np.asarray(ket, dtype=complex)
        amps = np.kron(amps, ket / np.linalg.norm(ket))
    return PureState(amps)


def make_bell_phase():
    """(|01> + i|10>)/sqrt(2): entangled, but its PI part is separable."""
    amps = np.zeros(4, dtype=complex)
    amps[1] = 1 / np.sqrt(2)
    amps[2] = 1j / np.sqrt(2)
    return PureState(amps)


def random_pure(n_qubits, seed=None):
    """Haar-random pure state from a normalized complex Gaussian vector."""
    n = check_n_qubits(n_qubits)
    rng = np.random.default_rng(seed)
    vec = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
    return PureState(vec / np.linalg.norm(vec))


def random_mixed(n_qubits, seed=None, rank=None):
    """Random density matrix ``G G^dagger / Tr`` with complex Gaussian ``G``."""
    n = check_n_qubits(n_qubits)
    rng = np.random.default_rng(seed)
    dim = 1 << n
    rank = dim if rank is None else int(rank)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix._wrap(rho / np.trace(rho).real)


def mix_white_noise(state, p):
    """``(1-p) rho + p I / 2^N``."""
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"noise weight p={p} outside [0, 1]")
    rho = as_density(state)
    out = (1.0 - p) * rho.matrix + (p / rho.dim) * np.eye(rho.dim)
    return DensityMatrix._wrap(out)


def noisy_w(n_qubits, p):
    """W state mixed with white noise of weight ``p``."""
    return mix_white_noise(make_w(n_qubits), p)


# ---------------------------------------------------------------- operations


def _row_axis(n, qubit):
    return n - 1 - qubit


def _check_qubits(qubits, n):
    qubits = sorted(set(int(q) for q in qubits))
    if not qubits:
        raise ValidationError("qubit set must be nonempty")
    if qubits[0] < 0 or qubits[-1] >= n:
        raise ValidationError(f"qubit indices {qubits} out of range for N={n}")
    return qubits


def partial_trace(state, keep):
    """Reduced density matrix on the qubits in ``keep``.

    Kept qubits retain their relative order: the smallest kept index becomes
    qubit 0 of the result.
    """
    rho = as_density(state)
    n = rho.n_qubits
    keep = _check_qubits(keep, n)
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    row = [letters[a] for a in range(n)]
    col = [letters[n + a] for a in range(n)]
    for q in range(n):
        if q not in keep:
            col[_row_axis(n, q)] = row[_row_axis(n, q)]
    out_axes = [_row_axis(n, q) for q in reversed(keep)]
    out = "".join(row[a] for a in out_axes) + "".join(col[a] for a in out_axes)
    spec = "".join(row) + "".join(col) + "->" + out
    tensor = np.einsum(spec, rho.matrix.reshape([2] * (2 * n)))
    d = 1 << len(keep)
    return DensityMatrix._wrap(tensor.reshape(d, d))


def permute_qubits(state, perm):
    """Relabel qubits: qubit ``q`` of the input becomes qubit ``perm[q]``."""
    perm = [int(p) for p in perm]
    if isinstance(state, PureState):
        n = state.n_qubits
    else:
        n = as_density(state).n_qubits
    if sorted(perm) != list(range(n)):
        raise ValidationError(f"{perm} is not a permutation of range({n})")
    # axis a of the input tensor is qubit n-1-a; it must land on axis n-1-perm[q]
    src = [_row_axis(n, q) for q in range(n)]
    dst = [_row_axis(n, perm[q]) for q in range(n)]
    if isinstance(state, PureState):
        t = np.moveaxis(state.amplitudes.reshape([2] * n), src, dst)
        return PureState(t.reshape(-1))
    rho = as_density(state)
    t = rho.matrix.reshape([2] * (2 * n))
    t = np.moveaxis(t, src + [n + a for a in src], dst + [n + a for a in dst])
    return DensityMatrix._wrap(t.reshape(rho.dim, rho.dim))


def pauli_expectation(state, pauli):
    """``Tr(rho P)`` using the sparse action of ``P`` on basis columns."""
    rho = as_density(state)
    if not isinstance(pauli, PauliString):
        pauli = PauliString(pauli)
    if len(pauli) != rho.n_qubits:
        raise ValidationError(f"Pauli string length {len(pauli)} != N={rho.n_qubits}")
    x, y, z = pauli.masks()
    flip = x | y
    cols = np.arange(rho.dim)
    # P|t> = i^{#Y} (-1)^{popcount(t & (Y|Z))} |t ^ flip>
    signs = 1 - 2 * (_popcount(cols & (y | z)) & 1)
    phase = 1j ** bin(y).count("1")
    value = phase * np.sum(rho.matrix[cols, cols ^ flip] * signs)
    if abs(value.imag) > 1e-9:
        raise NumericalError(f"Tr(rho P) has imaginary part {value.imag:.3g}")
    return float(value.real)


def _popcount(values):
    return np.bitwise_count(np.asarray(values, dtype=np.int64)).astype(np.int64)


def apply_single_qubit(tensor, unitary, axis):
    """Contract ``unitary`` into ``axis`` of ``tensor``."""
    return np.moveaxis(np.tensordot(unitary, tensor, axes=([1], [axis])), 0, axis)


def apply_local_basis(state, basis):
    """``B rho B^dagger`` for a product unitary ``B`` (pure states map to pure states)."""
    if not isinstance(basis, LocalBasisChange):
        basis = LocalBasisChange(tuple(basis))
    if isinstance(state, PureState):
        n = state.n_qubits
        if basis.n_qubits != n:
            raise ValidationError(f"basis has {basis.n_qubits} factors, state has {n} qubits")
        t = state.amplitudes.reshape([2] * n)
        for q, u in enumerate(basis.unitaries):
            t = apply_single_qubit(t, u, _row_axis(n, q))
        amps = t.reshape(-1)
        return PureState(amps / np.linalg.norm(amps))
    rho = as_density(state)
    n = rho.n_qubits
    if basis.n_qubits != n:
        raise ValidationError(f"basis has {basis.n_qubits} factors, state has {n} qubits")
    t = rho.matrix.reshape([2] * (2 * n))
    for q, u in enumerate(basis.unitaries):
        t = apply_single_qubit(t, u, _row_axis(n, q))
        t = apply_single_qubit(t, u.conj(), n + _row_axis(n, q))
    out = t.reshape(rho.dim, rho.dim)
    return DensityMatrix._wrap(0.5 * (out + out.conj().T))


def tensor_product(states: Sequence) -> DensityMatrix:
    """Kronecker product, first element on the most significant qubits."""
    out = np.ones((1, 1), dtype=complex)
    for s in states:
        out = np.kron(out, as_density(s).matrix)
    return DensityMatrix._wrap(out)


def basis_index(bits: Iterable[int]) -> int:
    """Index of the computational basis state with the given set bits (qubits)."""
    return sum(1 << int(b) for b in bits)
