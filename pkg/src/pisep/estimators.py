"""scikit-learn style wrappers.

The estimators accept batches of density matrices as complex arrays of shape
``(n_samples, 2^N, 2^N)`` (a single ``(2^N, 2^N)`` matrix is also accepted)
and expose ``get_params``/``set_params`` through :class:`BaseEstimator`, so
they compose with pipelines and parameter searches.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .coefficients import PICoefficients, coeffs_from_dense, compositions, dense_from_coeffs
from .exceptions import ValidationError
from .measurement import SettingData, design_settings, measure_all, reconstruct_coefficients
from .separability import evaluate_criterion
from .states import DensityMatrix, LocalBasisChange
from .symmetry import pi_project, pi_project_in_basis


def check_density_batch(X, check_psd=False):
    """Validate ``X`` and return a list of :class:`DensityMatrix` with a common qubit count."""
    if isinstance(X, DensityMatrix):
        X = [X]
    elif isinstance(X, np.ndarray) and X.ndim == 2:
        X = X[None]
    states = [
        x if isinstance(x, DensityMatrix) else DensityMatrix(np.asarray(x), check_psd=check_psd)
        for x in X
    ]
    if not states:
        raise ValidationError("empty batch")
    sizes = {s.n_qubits for s in states}
    if len(sizes) != 1:
        raise ValidationError(f"mixed qubit counts in batch: {sorted(sizes)}")
    return states


def _check_fitted(est, attr):
    if not hasattr(est, attr):
        raise NotFittedError(f"{type(est).__name__} is not fitted yet; call fit first")


class PIProjector(TransformerMixin, BaseEstimator):
    """Map density matrices to their PI parts.

    Parameters
    ----------
    basis : sequence of 2x2 unitaries, optional
        Product basis in which the PI part is taken (one unitary per qubit).
        ``None`` means the computational basis.
    """

    def __init__(self, basis=None):
        self.basis = basis

    def fit(self, X, y=None):
        states = check_density_batch(X)
        self.n_qubits_ = states[0].n_qubits
        if self.basis is not None and len(self.basis) != self.n_qubits_:
            raise ValidationError("basis length does not match the qubit count")
        return self

    def transform(self, X):
        _check_fitted(self, "n_qubits_")
        states = check_density_batch(X)
        if states[0].n_qubits != self.n_qubits_:
            raise ValidationError(f"fitted for N={self.n_qubits_}, got N={states[0].n_qubits}")
        if self.basis is None:
            return np.stack([pi_project(s).matrix for s in states])
        basis = LocalBasisChange(tuple(self.basis))
        return np.stack([pi_project_in_basis(s, basis).matrix for s in states])


class PICoefficientEncoder(TransformerMixin, BaseEstimator):
    """Encode density matrices as PI coefficient vectors (lexicographic composition order)."""

    def fit(self, X, y=None):
        self.n_qubits_ = check_density_batch(X)[0].n_qubits
        self.compositions_ = list(compositions(self.n_qubits_))
        return self

    def transform(self, X):
        _check_fitted(self, "n_qubits_")
        return np.stack([coeffs_from_dense(s).values for s in check_density_batch(X)])

    def inverse_transform(self, X):
        _check_fitted(self, "n_qubits_")
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack(
            [dense_from_coeffs(PICoefficients(self.n_qubits_, row)).matrix for row in X]
        )


class SeparabilityCertifier(BaseEstimator):
    """Evaluate the k-separability hierarchy on each state.

    Parameters
    ----------
    project : bool, default True
        Evaluate the criterion on the PI part instead of the raw matrix.
    """

    def __init__(self, project=True):
        self.project = project

    def fit(self, X=None, y=None):
        if X is not None:
            self.n_qubits_ = check_density_batch(X)[0].n_qubits
        else:
            self.n_qubits_ = None
        return self

    def reports(self, X):
        states = check_density_batch(X)
        if self.project:
            states = [pi_project(s) for s in states]
        return [evaluate_criterion(s) for s in states]

    def transform(self, X):
        """Columns ``A, B, C, k_eff`` (``nan`` where ``k_eff`` is undefined)."""
        return np.array(
            [
                [r.A, r.B, r.C, np.nan if r.k_eff is None else r.k_eff]
                for r in self.reports(X)
            ]
        )

    def predict(self, X):
        """True where genuine multipartite entanglement (k = 2) is certified."""
        return np.array([r.genuinely_multipartite for r in self.reports(X)])


class PITomography(BaseEstimator):
    """Recover the criterion coefficients from 2N+1-setting measurement data.

    ``fit`` takes a list of :class:`SettingData`; ``fit_state`` simulates the
    experiment on a dense state first (exact when ``shots`` is ``None``).

    Attributes
    ----------
    result_ : ReconstructionResult
    coefficients_ : dict
        The ``3N-2`` criterion coefficients.
    report_ : CriterionReport
    """

    def __init__(self, n_qubits=None, preset="default", shots=None, seed=None):
        self.n_qubits = n_qubits
        self.preset = preset
        self.shots = shots
        self.seed = seed

    def fit(self, X, y=None):
        data = list(X)
        if not data or not all(isinstance(d, SettingData) for d in data):
            raise ValidationError("PITomography.fit expects a list of SettingData")
        n = self.n_qubits if self.n_qubits is not None else data[0].n_qubits
        self.result_ = reconstruct_coefficients(data, n)
        self.coefficients_ = dict(self.result_.coefficients)
        self.report_ = self.result_.criterion_report()
        return self

    def fit_state(self, state):
        rho = check_density_batch(state)[0]
        settings = design_settings(rho.n_qubits, preset=self.preset)
        return self.fit(measure_all(rho, settings, shots=self.shots, seed=self.seed))

    def to_pi_coefficients(self):
        _check_fitted(self, "result_")
        return self.result_.to_pi_coefficients()
