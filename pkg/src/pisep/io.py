"""JSON serialization of states, coefficient tables and reports."""

from __future__ import annotations

import json

import numpy as np

from .coefficients import PICoefficients
from .exceptions import ValidationError
from .states import DensityMatrix, PureState


def _complex_pairs(values):
    return [[float(v.real), float(v.imag)] for v in np.asarray(values).ravel()]


def state_to_json(state):
    """``{"n_qubits", "kind", "data"}`` with complex entries as ``[re, im]``, row-major."""
    if isinstance(state, PureState):
        return {"n_qubits": state.n_qubits, "kind": "pure", "data": _complex_pairs(state.amplitudes)}
    if isinstance(state, DensityMatrix):
        return {"n_qubits": state.n_qubits, "kind": "density", "data": _complex_pairs(state.matrix)}
    raise ValidationError(f"cannot serialize {type(state).__name__}")


def state_from_json(doc):
    """Inverse of :func:`state_to_json`; density matrices are checked for positivity."""
    try:
        n = int(doc["n_qubits"])
        kind = doc["kind"]
        data = np.asarray(doc["data"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"malformed state document: {exc}") from exc
    if data.ndim != 2 or data.shape[1] != 2:
        raise ValidationError("state data must be a list of [re, im] pairs")
    values = data[:, 0] + 1j * data[:, 1]
    dim = 1 << n
    if kind == "pure":
        if values.size != dim:
            raise ValidationError(f"expected {dim} amplitudes, got {values.size}")
        return PureState(values)
    if kind == "density":
        if values.size != dim * dim:
            raise ValidationError(f"expected {dim * dim} matrix entries, got {values.size}")
        return DensityMatrix(values.reshape(dim, dim), check_psd=True)
    raise ValidationError(f"unknown state kind {kind!r}")


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def write_json(doc, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(doc))


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def save_state(state, path):
    write_json(state_to_json(state), path)


def load_state(path):
    return state_from_json(read_json(path))


def save_coefficients(coeffs, path):
    write_json(coeffs.to_json(), path)


def load_coefficients(path):
    return PICoefficients.from_json(read_json(path))
