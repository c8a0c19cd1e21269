"""Pure-state k-ME concurrence by exhaustive k-partition search."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import DimensionError, UnsupportedInputError, ValidationError
from .states import DensityMatrix, PureState, permute_qubits

MAX_PARTITION_QUBITS = 10
PURE_TOL = 1e-10


@dataclass(frozen=True)
class KPartition:
    """Set partition of qubit indices; blocks are sorted tuples ordered by their smallest element."""

    blocks: tuple

    def __post_init__(self):
        blocks = [tuple(sorted(int(q) for q in b)) for b in self.blocks]
        if any(not b for b in blocks):
            raise ValidationError("partition blocks must be nonempty")
        flat = [q for b in blocks for q in b]
        if len(set(flat)) != len(flat) or sorted(flat) != list(range(len(flat))):
            raise ValidationError(f"{self.blocks} is not a partition of range(N)")
        object.__setattr__(self, "blocks", tuple(sorted(blocks)))

    @property
    def k(self):
        return len(self.blocks)

    def __str__(self):
        return "|".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)

    def to_json(self):
        return [list(b) for b in self.blocks]


def stirling2(n, k):
    """Stirling number of the second kind via the standard recurrence."""
    table = [[0] * (k + 1) for _ in range(n + 1)]
    table[0][0] = 1
    for i in range(1, n + 1):
        for j in range(1, min(i, k) + 1):
            table[i][j] = j * table[i - 1][j] + table[i - 1][j - 1]
    return table[n][k]


def enumerate_k_partitions(n_qubits, k):
    """Every partition of ``{0..N-1}`` into exactly ``k`` nonempty blocks.

    Built from restricted growth strings (element ``i`` joins an existing
    block or opens the next one), pruning branches that cannot reach ``k``
    blocks. The result is sorted by the canonical block tuples, so
    ``{0}|{1,2}`` precedes ``{0,1}|{2}``.
    """
    n = int(n_qubits)
    if not 1 <= n <= MAX_PARTITION_QUBITS:
        raise DimensionError(f"N={n} outside [1, {MAX_PARTITION_QUBITS}]")
    if not 1 <= k <= n:
        raise ValidationError(f"k={k} must satisfy 1 <= k <= N={n}")

    labels = [0] * n

    def grow(i, used):
        if n - i < k - used:
            return
        if i == n:
            if used == k:
                blocks = [[] for _ in range(k)]
                for q, b in enumerate(labels):
                    blocks[b].append(q)
                yield KPartition(tuple(tuple(b) for b in blocks))
            return
        for b in range(min(used + 1, k)):
            labels[i] = b
            yield from grow(i + 1, max(used, b + 1))

    labels[0] = 0
    return sorted(grow(1, 1), key=lambda p: p.blocks)


def _as_pure(state):
    if isinstance(state, PureState):
        return state
    if isinstance(state, DensityMatrix):
        vals, vecs = np.linalg.eigh(state.matrix)
        if abs(vals[-1] - 1.0) > PURE_TOL:
            raise UnsupportedInputError(
                "k-ME concurrence is implemented for pure states only (mixed input given)"
            )
        vec = vecs[:, -1]
        return PureState(vec / np.linalg.norm(vec))
    raise UnsupportedInputError(f"unsupported state type {type(state).__name__}")


def _schmidt_weights(state, block):
    n = state.n_qubits
    block = sorted(block)
    rest = [q for q in range(n) if q not in block]
    if not rest:
        return np.ones(1)
    # tensor axis a holds qubit n-1-a
    t = state.amplitudes.reshape([2] * n)
    t = np.transpose(t, [n - 1 - q for q in block] + [n - 1 - q for q in rest])
    s = np.linalg.svd(t.reshape(1 << len(block), 1 << len(rest)), compute_uv=False)
    return s**2


def block_deficit(state, block):
    """``1 - Tr(rho_A^2)`` for a pure state's reduction to ``block``.

    Evaluated as ``sum_i w_i sum_{j != i} w_j`` over the Schmidt weights, which
    avoids cancelling ``1 - (1 - tiny)``: for a product across the cut the
    result is of order ``eps^2`` rather than ``eps``, keeping the square root
    in the concurrence at round-off level.
    """
    w = _schmidt_weights(state, block)
    others = np.array([np.sum(np.delete(w, i)) for i in range(len(w))])
    return float(np.dot(w, others))


def block_purity(state, block):
    """``Tr(rho_A^2)`` of a pure state's reduced state on ``block``."""
    return float(np.sum(_schmidt_weights(state, block) ** 2))


def partition_value(state, partition):
    """Value of the concurrence functional on one fixed partition."""
    k = partition.k
    deficit = sum(block_deficit(state, b) for b in partition.blocks)
    return math.sqrt(max(2.0 * deficit / k, 0.0))


def kme_concurrence_pure(state, k):
    """k-ME concurrence of a pure state and a minimizing partition.

    Minimizes ``sqrt((2/k) sum_t [1 - Tr(rho_{A_t}^2)])`` over all k-partitions;
    ties resolve to the first partition in enumeration order.
    """
    psi = _as_pure(state)
    n = psi.n_qubits
    if not 2 <= k <= n:
        raise ValidationError(f"k={k} must satisfy 2 <= k <= N={n}")
    if n > MAX_PARTITION_QUBITS:
        raise DimensionError(f"N={n} exceeds partition enumeration cap {MAX_PARTITION_QUBITS}")
    cache = {}

    def deficit(block):
        if block not in cache:
            cache[block] = block_deficit(psi, block)
        return cache[block]

    best_value, best_part = math.inf, None
    for part in enumerate_k_partitions(n, k):
        total = sum(deficit(b) for b in part.blocks)
        value = math.sqrt(max(2.0 * total / k, 0.0))
        if value < best_value:
            best_value, best_part = value, part
    return best_value, best_part


def check_permutation_invariance(state, k, trials=10, seed=0, permutations=None):
    """Largest change of the k-ME concurrence under qubit relabelling.

    Uses ``trials`` random permutations, or the explicit ``permutations`` list
    when given.
    """
    psi = _as_pure(state)
    n = psi.n_qubits
    if permutations is None:
        rng = np.random.default_rng(seed)
        permutations = [rng.permutation(n) for _ in range(trials)]
    reference, _ = kme_concurrence_pure(psi, k)
    worst = 0.0
    for perm in permutations:
        value, _ = kme_concurrence_pure(permute_qubits(psi, perm), k)
        worst = max(worst, abs(value - reference))
    return worst
