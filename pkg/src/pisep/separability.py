"""k-separability criterion hierarchy and the degree of separability.

For a k-separable N-qubit state the matrix elements satisfy

    A <= B + C (N - k) / 2

with ``A`` the summed single-excitation coherences, ``B`` the summed
geometric means of ``rho[0,0]`` and the double-excitation populations, and
``C`` the total single-excitation population. A violation certifies
k-nonseparability; at ``k = 2`` it certifies genuine N-partite entanglement.
Solving the inequality for ``k`` gives ``k_eff = N - 2 (A - B) / C``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import PICoefficients, criterion_elements_from_coeffs
from .exceptions import DimensionError, ValidationError
from .states import (
    DensityMatrix,
    LocalBasisChange,
    apply_local_basis,
    as_density,
    check_n_qubits,
    euler_unitary,
)
from .symmetry import pi_project

DETECTION_TOL = 1e-12
C_TOL = 1e-12
DIAG_TOL = 1e-10


class Verdict(str, enum.Enum):
    K_NONSEPARABLE = "K_NONSEPARABLE"
    NOT_DETECTED = "NOT_DETECTED"


@dataclass(frozen=True)
class CriterionReport:
    n_qubits: int
    A: float
    B: float
    C: float
    k_eff: float | None
    verdicts: dict = field(default_factory=dict)

    @property
    def detected_levels(self):
        return [k for k, v in self.verdicts.items() if v is Verdict.K_NONSEPARABLE]

    @property
    def genuinely_multipartite(self):
        """Detected at k = 2."""
        return self.verdicts.get(2) is Verdict.K_NONSEPARABLE

    def to_json(self):
        doc = {
            "A": self.A,
            "B": self.B,
            "C": self.C,
            "k_eff": self.k_eff,
            "verdicts": {str(k): v.value for k, v in self.verdicts.items()},
        }
        if self.k_eff is None:
            doc["note"] = "k_eff undefined: single-excitation population C is zero"
        return doc


def _clamp_diag(value, label):
    if value < -DIAG_TOL:
        raise ValidationError(f"negative diagonal entry {label} = {value:.3g}")
    return max(value, 0.0)


def compute_abc(state):
    """``(A, B, C)`` from the dense matrix elements of ``state``."""
    rho = as_density(state)
    n = rho.n_qubits
    if n < 2:
        raise DimensionError("the criterion needs N >= 2")
    m = rho.matrix
    single = [1 << i for i in range(n)]
    d0 = _clamp_diag(m[0, 0].real, "rho[0,0]")
    a = b = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            a += abs(m[single[i], single[j]])
            idx = single[i] + single[j]
            b += math.sqrt(d0 * _clamp_diag(m[idx, idx].real, f"rho[{idx},{idx}]"))
    c = sum(_clamp_diag(m[s, s].real, f"rho[{s},{s}]") for s in single)
    return a, b, c


def abc_from_coeffs(coeffs):
    """``(A, B, C)`` of a PI state from its coefficients, using index independence."""
    n = coeffs.n_qubits
    if n < 2:
        raise DimensionError("the criterion needs N >= 2")
    el = criterion_elements_from_coeffs(coeffs)
    pairs = n * (n - 1) / 2
    d0 = _clamp_diag(el.d0, "d0")
    d2 = _clamp_diag(el.d2, "d2")
    return abs(el.offdiag) * pairs, math.sqrt(d0 * d2) * pairs, n * _clamp_diag(el.d1, "d1")


def report_from_abc(n_qubits, a, b, c):
    k_eff = float(n_qubits - 2.0 * (a - b) / c) if c > C_TOL else None
    verdicts = {
        k: (
            Verdict.K_NONSEPARABLE
            if a > b + c * (n_qubits - k) / 2.0 + DETECTION_TOL
            else Verdict.NOT_DETECTED
        )
        for k in range(2, n_qubits + 1)
    }
    return CriterionReport(n_qubits, float(a), float(b), float(c), k_eff, verdicts)


def evaluate_criterion(state_or_coeffs):
    """Evaluate the full k = 2..N hierarchy and ``k_eff``.

    Accepts a dense state (matrix elements used as they are) or a
    :class:`PICoefficients` table (PI state).
    """
    if isinstance(state_or_coeffs, PICoefficients):
        n = state_or_coeffs.n_qubits
        a, b, c = abc_from_coeffs(state_or_coeffs)
    else:
        rho = as_density(state_or_coeffs)
        n = rho.n_qubits
        a, b, c = compute_abc(rho)
    return report_from_abc(n, a, b, c)


# ----------------------------------------------------------- noisy W family


def _check_noise(n_qubits, p):
    if n_qubits < 2:
        raise DimensionError("N must be >= 2")
    if not 0.0 <= p <= 1.0:
        raise ValidationError(f"p={p} outside [0, 1]")


def w_noise_keff(n_qubits, p):
    """Closed-form ``k_eff`` of ``(1-p)|W><W| + p I/2^N``."""
    n = int(n_qubits)
    _check_noise(n, p)
    two_n = 2.0**n
    return (two_n - (two_n + n - 2 * n * n) * p) / (two_n + (n - two_n) * p)


def w_noise_abc(n_qubits, p):
    """Closed-form ``(A, B, C)`` for the noisy W state."""
    n = int(n_qubits)
    _check_noise(n, p)
    two_n = 2.0**n
    return (
        (1 - p) * (n - 1) / 2,
        n * (n - 1) / 2 * p / two_n,
        (1 - p) + n * p / two_n,
    )


def w_noise_detection_threshold(n_qubits, k):
    """Noise weight ``p*`` at which the noisy W state's ``k_eff`` equals ``k``.

    Setting the linear-fractional ``k_eff(p)`` equal to ``k`` and solving gives
    ``p* = 2^N (k-1) / ((k-1) 2^N + 2N^2 - N(k+1))``. Detection at level ``k``
    holds for ``p < p*``.
    """
    n = int(n_qubits)
    if n < 2:
        raise DimensionError("N must be >= 2")
    if not 2 <= k <= n:
        raise ValidationError(f"k={k} outside [2, N={n}]")
    two_n = 2.0**n
    p_star = two_n * (k - 1) / ((k - 1) * two_n + 2 * n * n - n * (k + 1))
    if not 0.0 <= p_star <= 1.0:
        raise ValidationError(f"no threshold in [0, 1] for N={n}, k={k}")
    return p_star


# ------------------------------------------------------- basis maximization


def _score(report):
    return report.k_eff if report.k_eff is not None else math.inf


def _golden_section(f, lo, hi, evals):
    inv_phi = (math.sqrt(5) - 1) / 2
    x1 = hi - inv_phi * (hi - lo)
    x2 = lo + inv_phi * (hi - lo)
    f1, f2 = f(x1), f(x2)
    for _ in range(max(evals - 2, 0)):
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - inv_phi * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + inv_phi * (hi - lo)
            f2 = f(x2)
    return (x1, f1) if f1 <= f2 else (x2, f2)


def report_in_basis(state, basis):
    """Criterion report of the PI part taken in the product basis ``basis``."""
    return evaluate_criterion(pi_project(apply_local_basis(as_density(state), basis)))


def maximize_over_bases(state, restarts=50, seed=0, sweeps=4, line_evals=24):
    """Heuristic search for the local basis whose PI part gives the smallest ``k_eff``.

    Each qubit's unitary is parameterized by three ZYZ Euler angles. Restart 0
    starts at the identity; the others start from uniformly random angles.
    Every start is refined by ``sweeps`` passes of coordinate-wise golden
    section search (``line_evals`` evaluations per coordinate, bracket of
    width 2 pi around the current angle). Only improvements are accepted.

    The result is a witness, not a certified global optimum.

    Returns
    -------
    (CriterionReport, LocalBasisChange)
        Best report (ties go to the lowest restart index) and its basis.
    """
    rho = as_density(state)
    n = check_n_qubits(rho.n_qubits, min_qubits=2)
    rng = np.random.default_rng(seed)
    starts = [np.zeros((n, 3))]
    starts += [rng.uniform(0, 2 * np.pi, size=(n, 3)) for _ in range(max(restarts - 1, 0))]

    matrix = rho.matrix

    def evaluate(angles):
        u = np.ones((1, 1), dtype=complex)
        for row in angles[::-1]:
            u = np.kron(u, euler_unitary(*row))
        rotated = DensityMatrix._wrap(u @ matrix @ u.conj().T)
        return evaluate_criterion(pi_project(rotated))

    best = None
    for angles in starts:
        angles = angles.copy()
        report = evaluate(angles)
        score = _score(report)
        for _ in range(sweeps):
            for q in range(n):
                for axis in range(3):
                    centre = angles[q, axis]

                    def line(theta):
                        trial = angles.copy()
                        trial[q, axis] = theta
                        return _score(evaluate(trial))

                    theta, value = _golden_section(line, centre - np.pi, centre + np.pi, line_evals)
                    if value < score:
                        angles[q, axis] = theta
                        score = value
        report = evaluate(angles)
        if best is None or _score(report) < _score(best[0]):
            best = (report, LocalBasisChange.from_euler(angles))
    return best
