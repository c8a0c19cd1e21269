"""Local measurement scheme with 2N+1 settings and linear-inversion reconstruction.

Every setting measures the same observable ``A = a X + b Y + c Z`` on all
qubits. For a PI state the outcome statistics only matter through ``u``, the
number of ``+1`` results in a shot, and the symmetrized correlator

    Tr rho Pi(A^(N-n) (x) I^n) = (N-n)! n! E[K_{N-n}(u)]

where ``K_j(u) = sum_s (-1)^s C(N-u, s) C(u, j-s)`` is the sum of the
products of outcomes over all ``j``-subsets of qubits.

Reconstruction runs in two stages. The ``Z_AXIS`` setting gives every
``e[0,0,m,N-m]`` directly. For each ``n``, the planar settings give a linear
system in the remaining ``e[0,l,N-n-l,n]`` (YZ plane) or ``e[k,0,N-n-k,n]``
(XZ plane), with the already-known ``Z`` term moved to the right-hand side.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .coefficients import (
    PICoefficients,
    check_direction,
    criterion_coefficient_keys,
    factorial,
    symmetrized_expectation,
)
from .exceptions import DimensionError, ReconstructionError, ValidationError
from .separability import evaluate_criterion
from .states import LocalBasisChange, apply_local_basis, as_density

RNG_ALGORITHM = "numpy.random.PCG64"
MAX_CONDITION = 1e10


class Family(str, enum.Enum):
    Z_AXIS = "Z_AXIS"
    YZ_PLANE = "YZ_PLANE"
    XZ_PLANE = "XZ_PLANE"


@dataclass(frozen=True)
class MeasurementSetting:
    direction: tuple
    family: Family

    def __post_init__(self):
        a, b, c = check_direction(self.direction)
        family = Family(self.family)
        if family is Family.YZ_PLANE and a != 0.0:
            raise ValidationError("YZ_PLANE settings need a = 0")
        if family is Family.XZ_PLANE and b != 0.0:
            raise ValidationError("XZ_PLANE settings need b = 0")
        if family is Family.Z_AXIS and (a, b) != (0.0, 0.0):
            raise ValidationError("Z_AXIS setting must be (0, 0, 1)")
        object.__setattr__(self, "direction", (a, b, c))
        object.__setattr__(self, "family", family)

    @property
    def in_plane(self):
        """The non-Z component (``b`` for YZ, ``a`` for XZ)."""
        a, b, _ = self.direction
        return b if self.family is Family.YZ_PLANE else a

    def observable(self):
        a, b, c = self.direction
        return np.array([[c, a - 1j * b], [a + 1j * b, -c]])

    def label(self):
        a, b, c = self.direction
        return f"{a:+.6f}*X {b:+.6f}*Y {c:+.6f}*Z"


def design_settings(n_qubits, preset="default"):
    """The ``2N+1`` measurement settings.

    ``preset="default"``: ``Z``, then ``N`` YZ-plane and ``N`` XZ-plane
    directions at angles ``(2i+1) pi / (4N)`` from the Z axis.
    ``preset="three-qubit"`` (``N = 3`` only): Z, X, Y, (Y +- Z)/sqrt 2,
    (X +- Z)/sqrt 2.
    """
    n = int(n_qubits)
    if n < 2:
        raise DimensionError("design needs N >= 2")
    z = MeasurementSetting((0.0, 0.0, 1.0), Family.Z_AXIS)
    if preset == "three-qubit":
        if n != 3:
            raise ValidationError("the 'three-qubit' preset is defined for N = 3 only")
        s = 1 / math.sqrt(2)
        return [
            z,
            MeasurementSetting((1.0, 0.0, 0.0), Family.XZ_PLANE),
            MeasurementSetting((0.0, 1.0, 0.0), Family.YZ_PLANE),
            MeasurementSetting((0.0, s, s), Family.YZ_PLANE),
            MeasurementSetting((0.0, s, -s), Family.YZ_PLANE),
            MeasurementSetting((s, 0.0, s), Family.XZ_PLANE),
            MeasurementSetting((s, 0.0, -s), Family.XZ_PLANE),
        ]
    if preset != "default":
        raise ValidationError(f"unknown preset {preset!r}")
    angles = [(2 * i + 1) * math.pi / (4 * n) for i in range(n)]
    yz = [MeasurementSetting((0.0, math.sin(t), math.cos(t)), Family.YZ_PLANE) for t in angles]
    xz = [MeasurementSetting((math.sin(t), 0.0, math.cos(t)), Family.XZ_PLANE) for t in angles]
    return [z] + yz + xz


def parameter_count(n_qubits):
    """Number of coefficients fixed by the 2N+1-setting experiment, ``N^2 + 2N``."""
    n = int(n_qubits)
    if n < 2:
        raise DimensionError("N must be >= 2")
    return n + 2 * sum(n - k for k in range(n))


# ------------------------------------------------------------------ data


def krawtchouk(n_qubits, j, u):
    """Sum over ``j``-subsets of the product of ``+-1`` outcomes when ``u`` are ``+1``."""
    return sum(
        (-1) ** s * math.comb(n_qubits - u, s) * math.comb(u, j - s)
        for s in range(0, j + 1)
    )


def krawtchouk_table(n_qubits):
    """``T[n, u]`` = per-shot estimator of the correlator with ``n`` identities."""
    n = n_qubits
    table = np.zeros((n, n + 1))
    for ni in range(n):
        j = n - ni
        scale = factorial(j) * factorial(ni)
        for u in range(n + 1):
            table[ni, u] = scale * krawtchouk(n, j, u)
    return table


@dataclass(frozen=True, eq=False)
class SettingData:
    """Symmetrized correlators ``[n = 0..N-1]`` for one setting.

    ``shots is None`` marks exact data. Sampled data carries the ``u``
    histogram and the estimated covariance of the correlators.
    """

    setting: MeasurementSetting
    correlators: np.ndarray
    shots: int | None = None
    histogram: np.ndarray | None = None
    seed: int | None = None
    covariance: np.ndarray | None = None

    @property
    def n_qubits(self):
        return len(self.correlators)

    def to_json(self):
        return {
            "direction": list(self.setting.direction),
            "family": self.setting.family.value,
            "shots": "exact" if self.shots is None else int(self.shots),
            "correlators": [float(v) for v in self.correlators],
            "histogram": None if self.histogram is None else [int(v) for v in self.histogram],
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, doc):
        try:
            setting = MeasurementSetting(tuple(doc["direction"]), Family(doc["family"]))
            correlators = np.asarray(doc["correlators"], dtype=float)
            shots = None if doc.get("shots", "exact") == "exact" else int(doc["shots"])
            hist = doc.get("histogram")
        except (KeyError, TypeError, ValueError) as exc:
            raise ValidationError(f"malformed setting data: {exc}") from exc
        hist = None if hist is None else np.asarray(hist, dtype=np.int64)
        cov = None
        if hist is not None and shots:
            _, cov = _estimate(krawtchouk_table(len(correlators)), hist, shots)
        return cls(setting, correlators, shots, hist, doc.get("seed"), cov)


def outcome_distribution(state, setting):
    """Probability of ``u`` ``+1`` outcomes, ``u = 0..N``, for a dense state."""
    rho = as_density(state)
    n = rho.n_qubits
    _, vecs = np.linalg.eigh(setting.observable())
    w = vecs[:, ::-1]  # column 0 is the +1 eigenvector
    rotated = apply_local_basis(rho, LocalBasisChange(tuple(w.conj().T for _ in range(n))))
    probs = np.clip(np.diag(rotated.matrix).real, 0.0, None)
    ones = np.bitwise_count(np.arange(rho.dim)).astype(np.int64)
    p_u = np.bincount(n - ones, weights=probs, minlength=n + 1)
    return p_u / p_u.sum()


def exact_setting_data(state, setting):
    """Exact correlators from coefficients (closed form) or a dense state (outcome distribution)."""
    if isinstance(state, PICoefficients):
        n = state.n_qubits
        corr = np.array(
            [symmetrized_expectation(state, setting.direction, ni) for ni in range(n)]
        )
    else:
        rho = as_density(state)
        corr = krawtchouk_table(rho.n_qubits) @ outcome_distribution(rho, setting)
    return SettingData(setting, corr)


def _estimate(table, hist, shots):
    hist = np.asarray(hist, dtype=float)
    mean = table @ hist / shots
    centred = table - mean[:, None]
    second = (centred * hist) @ centred.T / shots
    # covariance of the sample mean
    cov = second / shots
    return mean, cov


def sample_setting_data(state, setting, shots, seed=None):
    """Shot-sampled correlators for one setting.

    Each shot's outcome enters only through ``u``; histograms are drawn from
    the exact distribution of ``u`` with ``numpy.random.default_rng(seed)``.
    """
    shots = int(shots)
    if shots < 1:
        raise ValidationError("shots must be >= 1")
    rho = as_density(state)
    p_u = outcome_distribution(rho, setting)
    rng = np.random.default_rng(seed)
    hist = rng.multinomial(shots, p_u)
    mean, cov = _estimate(krawtchouk_table(rho.n_qubits), hist, shots)
    return SettingData(setting, mean, shots, hist, seed, cov)


def measure_all(state, settings, shots=None, seed=None):
    """Exact (``shots=None``) or sampled data for every setting.

    Sampled settings get independent integer seeds derived from ``seed``
    through ``numpy.random.SeedSequence``.
    """
    if shots is None:
        return [exact_setting_data(state, s) for s in settings]
    children = np.random.SeedSequence(seed).spawn(len(settings))
    return [
        sample_setting_data(state, s, shots, seed=int(child.generate_state(1)[0]))
        for s, child in zip(settings, children)
    ]


# -------------------------------------------------------- reconstruction


@dataclass
class ReconstructionResult:
    n_qubits: int
    coefficients: dict
    all_coefficients: dict
    condition_numbers: dict = field(default_factory=dict)
    residuals: dict = field(default_factory=dict)
    standard_errors: dict | None = None

    def to_pi_coefficients(self):
        """Coefficient table holding every determined entry (others zero)."""
        return PICoefficients.from_mapping(self.n_qubits, self.all_coefficients)

    def criterion_report(self):
        return evaluate_criterion(self.to_pi_coefficients())

    def to_json(self):
        doc = self.to_pi_coefficients().to_json()
        doc["condition_numbers"] = {
            fam: [float(v) for v in vals] for fam, vals in self.condition_numbers.items()
        }
        doc["residuals"] = {
            fam: [float(v) for v in vals] for fam, vals in self.residuals.items()
        }
        if self.standard_errors is not None:
            doc["standard_errors"] = [
                {"k": k, "l": l, "m": m, "n": n, "se": se}
                for (k, l, m, n), se in self.standard_errors.items()
            ]
        return doc


def _plane_keys(n_qubits, family):
    keys = []
    for ni in range(n_qubits):
        j = n_qubits - ni
        for p in range(1, j + 1):
            keys.append((0, p, j - p, ni) if family is Family.YZ_PLANE else (p, 0, j - p, ni))
    return keys


def _solve(n, z_corr, planes):
    """Linear reconstruction. ``planes`` maps family -> (in-plane comps, c comps, correlator matrix)."""
    norm = 2.0**n * factorial(n)
    z = {}
    for m in range(1, n + 1):
        ni = n - m
        z[m] = z_corr[ni] / (factorial(m) * factorial(ni) * norm)
    values = {(0, 0, m, n - m): z[m] for m in range(1, n + 1)}
    conds, resids = {}, {}
    for family, (t, c, corr) in planes.items():
        fam_cond, fam_res = [], []
        for ni in range(n):
            j = n - ni
            if len(t) < j:
                raise ReconstructionError(
                    f"{family.value}: {len(t)} settings cannot determine {j} unknowns at n={ni}"
                )
            design = np.stack([t**p * c ** (j - p) for p in range(1, j + 1)], axis=1)
            rhs = corr[:, ni] / (factorial(j) * factorial(ni) * norm) - c**j * z[j]
            scale = np.linalg.norm(design, axis=0)
            if np.any(scale == 0):
                raise ReconstructionError(f"{family.value}: singular design at n={ni}")
            scaled = design / scale
            cond = np.linalg.cond(scaled)
            if not np.isfinite(cond) or cond > MAX_CONDITION:
                raise ReconstructionError(
                    f"{family.value}: design ill-conditioned at n={ni} (condition {cond:.3g})"
                )
            sol, *_ = np.linalg.lstsq(scaled, rhs, rcond=None)
            sol = sol / scale
            fam_cond.append(cond)
            fam_res.append(float(np.linalg.norm(design @ sol - rhs)))
            for p in range(1, j + 1):
                key = (0, p, j - p, ni) if family is Family.YZ_PLANE else (p, 0, j - p, ni)
                values[key] = float(sol[p - 1])
        conds[family.value] = fam_cond
        resids[family.value] = fam_res
    return values, conds, resids


def _split(data, n):
    z_rows = [d for d in data if d.setting.family is Family.Z_AXIS]
    if not z_rows:
        raise ReconstructionError("no Z_AXIS setting in data")
    planes = {}
    index = {}
    for family in (Family.YZ_PLANE, Family.XZ_PLANE):
        rows = [d for d in data if d.setting.family is family]
        if not rows:
            raise ReconstructionError(f"no {family.value} settings in data")
        planes[family] = (
            np.array([d.setting.in_plane for d in rows]),
            np.array([d.setting.direction[2] for d in rows]),
            np.stack([np.asarray(d.correlators, dtype=float) for d in rows]),
        )
        index[family] = rows
    for d in data:
        if d.n_qubits != n:
            raise ValidationError(f"setting data has {d.n_qubits} correlators, expected N={n}")
    return z_rows[0], planes, index


def reconstruct_coefficients(data, n_qubits):
    """Recover the determined coefficients, including the ``3N-2`` the criterion needs.

    Uses least squares over all settings of each plane. If every input
    carries a covariance estimate, standard errors are propagated through the
    (linear) reconstruction.
    """
    n = int(n_qubits)
    if n < 2:
        raise DimensionError("N must be >= 2")
    z_data, planes, index = _split(data, n)
    values, conds, resids = _solve(n, np.asarray(z_data.correlators, dtype=float), planes)
    crit = {key: values[key] for key in criterion_coefficient_keys(n)}
    result = ReconstructionResult(n, crit, values, conds, resids)
    used = [z_data] + index[Family.YZ_PLANE] + index[Family.XZ_PLANE]
    if all(d.covariance is not None for d in used):
        result.standard_errors = _propagate(n, used, planes, index, values)
    return result


def _propagate(n, used, planes, index, values):
    """Standard errors of every coefficient; the map from correlators to coefficients is linear."""
    keys = list(values)
    blocks = len(used)
    jac = np.zeros((len(keys), blocks * n))
    for col in range(blocks * n):
        block, ni = divmod(col, n)
        unit = np.zeros((blocks, n))
        unit[block, ni] = 1.0
        z_corr = unit[0]
        offset = 1
        unit_planes = {}
        for family in (Family.YZ_PLANE, Family.XZ_PLANE):
            count = len(index[family])
            t, c, _ = planes[family]
            unit_planes[family] = (t, c, unit[offset : offset + count])
            offset += count
        vals, _, _ = _solve(n, z_corr, unit_planes)
        jac[:, col] = [vals[k] for k in keys]
    cov = np.zeros((blocks * n, blocks * n))
    for b, d in enumerate(used):
        cov[b * n : (b + 1) * n, b * n : (b + 1) * n] = d.covariance
    var = np.einsum("ij,jk,ik->i", jac, cov, jac)
    return {k: float(math.sqrt(max(v, 0.0))) for k, v in zip(keys, var)}


def _find(data, direction):
    for d in data:
        if np.allclose(d.setting.direction, direction, atol=1e-12):
            return d
    raise ReconstructionError(f"no setting with direction {direction}")


def three_qubit_closed_form(data):
    """``(e_0210, e_2010)`` for ``N = 3`` from the explicit three-setting combinations.

    ``e_0210 = sqrt2/48 (<A+^3> - <A-^3> - <Z^3>/sqrt2)`` with
    ``A+- = (Y +- Z)/sqrt2``, and the same with X in place of Y for ``e_2010``.
    Plain expectations ``<A^3>`` are the ``n = 0`` correlators divided by 3!.
    """
    s = 1 / math.sqrt(2)

    def plain(direction):
        return _find(data, direction).correlators[0] / 6.0

    z3 = plain((0.0, 0.0, 1.0))
    e0210 = math.sqrt(2) / 48 * (plain((0.0, s, s)) - plain((0.0, s, -s)) - s * z3)
    e2010 = math.sqrt(2) / 48 * (plain((s, 0.0, s)) - plain((s, 0.0, -s)) - s * z3)
    return e0210, e2010
