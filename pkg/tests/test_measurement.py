import itertools
import json
import math

import numpy as np
import pytest

from pisep.coefficients import coeffs_from_dense, criterion_coefficient_keys
from pisep.exceptions import DimensionError, ReconstructionError, ValidationError
from pisep.measurement import (
    Family,
    MeasurementSetting,
    SettingData,
    design_settings,
    exact_setting_data,
    krawtchouk,
    measure_all,
    outcome_distribution,
    parameter_count,
    reconstruct_coefficients,
    sample_setting_data,
    three_qubit_closed_form,
)
from pisep.separability import evaluate_criterion
from pisep.states import DensityMatrix, make_product, make_w, noisy_w, random_mixed

from conftest import random_pi_state, symmetrized_operator

Z = MeasurementSetting((0.0, 0.0, 1.0), Family.Z_AXIS)


def test_design_shape_and_families():
    for n in range(2, 17):
        settings = design_settings(n)
        assert len(settings) == 2 * n + 1
        fams = [s.family for s in settings]
        assert fams.count(Family.YZ_PLANE) == fams.count(Family.XZ_PLANE) == n
        for s in settings:
            assert sum(v * v for v in s.direction) == pytest.approx(1.0, abs=1e-12)


def test_three_qubit_preset():
    s = 1 / math.sqrt(2)
    dirs = [tuple(x.direction) for x in design_settings(3, preset="three-qubit")]
    expected = [(0, 0, 1), (1, 0, 0), (0, 1, 0), (0, s, s), (0, s, -s), (s, 0, s), (s, 0, -s)]
    np.testing.assert_allclose(dirs, expected, atol=1e-15)
    with pytest.raises(ValidationError):
        design_settings(4, preset="three-qubit")
    with pytest.raises(ValidationError):
        design_settings(3, preset="bogus")
    with pytest.raises(DimensionError):
        design_settings(1)


@pytest.mark.parametrize("n", range(2, 17))
def test_design_matrices_nonsingular(n):
    yz = [s for s in design_settings(n) if s.family is Family.YZ_PLANE]
    t = np.array([s.direction[1] for s in yz])
    c = np.array([s.direction[2] for s in yz])
    assert len(set(np.round(t / c, 12))) == n
    for ni in range(n):
        j = n - ni
        rows = np.stack([t**p * c ** (j - p) for p in range(1, j + 1)], axis=1)
        rows = rows / np.linalg.norm(rows, axis=0)
        assert np.linalg.cond(rows) < 1e8
        if n <= 10:
            square = rows[:j] / np.linalg.norm(rows[:j], axis=1, keepdims=True)
            assert abs(np.linalg.det(square)) > 1e-12


def test_setting_validation():
    with pytest.raises(ValidationError):
        MeasurementSetting((0.5, 0.0, 0.5), Family.XZ_PLANE)
    with pytest.raises(ValidationError):
        MeasurementSetting((0.6, 0.0, 0.8), Family.YZ_PLANE)
    with pytest.raises(ValidationError):
        MeasurementSetting((1.0, 0.0, 0.0), Family.Z_AXIS)


def test_parameter_count():
    assert parameter_count(3) == 15
    assert parameter_count(2) == 8
    for n in range(2, 20):
        assert parameter_count(n) == n * n + 2 * n > 3 * n - 2


def test_krawtchouk_small_cases():
    assert krawtchouk(2, 2, 1) == -1
    assert krawtchouk(3, 3, 3) == 1
    assert krawtchouk(3, 1, 0) == -3


@pytest.mark.parametrize("n", [2, 3, 4])
def test_krawtchouk_is_subset_sum(n):
    # sum over j-subsets of the product of outcomes, for outcomes with u ones = +1
    for u in range(n + 1):
        outcomes = [1] * u + [-1] * (n - u)
        for j in range(n + 1):
            brute = sum(math.prod(outcomes[q] for q in s) for s in itertools.combinations(range(n), j))
            assert krawtchouk(n, j, u) == brute


def test_z_axis_on_ground_state():
    data = exact_setting_data(make_product(3), Z)
    np.testing.assert_allclose(data.correlators, [6, 6, 6], atol=1e-12)
    via_coeffs = exact_setting_data(coeffs_from_dense(make_product(3)), Z)
    np.testing.assert_allclose(via_coeffs.correlators, [6, 6, 6], atol=1e-12)


def test_three_qubit_z_constants():
    c = coeffs_from_dense(random_mixed(3, seed=4))
    corr = exact_setting_data(c, Z).correlators
    assert corr[0] == pytest.approx(288 * c[(0, 0, 3, 0)], abs=1e-13)
    assert corr[1] == pytest.approx(96 * c[(0, 0, 2, 1)], abs=1e-13)
    assert corr[2] == pytest.approx(96 * c[(0, 0, 1, 2)], abs=1e-13)


def test_y_axis_three_qubits():
    c = coeffs_from_dense(random_pi_state(3, seed=5))
    y = MeasurementSetting((0.0, 1.0, 0.0), Family.YZ_PLANE)
    assert exact_setting_data(c, y).correlators[0] == pytest.approx(288 * c[(0, 3, 0, 0)], abs=1e-13)


def test_maximally_mixed_correlators_vanish():
    rho = DensityMatrix(np.eye(16) / 16)
    for s in design_settings(4):
        np.testing.assert_allclose(exact_setting_data(rho, s).correlators, 0, atol=1e-13)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_dense_path_matches_permutation_sum(n):
    # also holds for non-PI input: the symmetrized observable is itself PI
    rho = random_mixed(n, seed=10 + n)
    c = coeffs_from_dense(rho)
    for s in design_settings(n):
        a, b, cc = s.direction
        obs = s.observable()
        expected = [
            np.trace(rho.matrix @ symmetrized_operator([obs] * (n - ni) + [np.eye(2)] * ni)).real
            for ni in range(n)
        ]
        np.testing.assert_allclose(exact_setting_data(rho, s).correlators, expected, atol=1e-11)
        np.testing.assert_allclose(exact_setting_data(c, s).correlators, expected, atol=1e-11)


def test_outcome_distribution_is_binomial_for_product():
    # |0> measured along X gives +1 with probability 1/2 on each qubit
    x = MeasurementSetting((1.0, 0.0, 0.0), Family.XZ_PLANE)
    p_u = outcome_distribution(make_product(4), x)
    np.testing.assert_allclose(p_u, [math.comb(4, u) / 16 for u in range(5)], atol=1e-14)
    np.testing.assert_allclose(outcome_distribution(make_product(3), Z), [0, 0, 0, 1], atol=1e-15)


def test_sampling_deterministic_and_zero_variance():
    d1 = sample_setting_data(make_product(3), Z, 1000, seed=3)
    assert d1.histogram.tolist() == [0, 0, 0, 1000]
    np.testing.assert_allclose(d1.covariance, 0, atol=1e-15)
    w = make_w(3)
    a = sample_setting_data(w, design_settings(3)[1], 500, seed=7)
    b = sample_setting_data(w, design_settings(3)[1], 500, seed=7)
    assert a.histogram.tolist() == b.histogram.tolist()
    with pytest.raises(ValidationError):
        sample_setting_data(w, Z, 0)


def test_measure_all_independent_streams():
    data = measure_all(make_w(3), design_settings(3), shots=200, seed=1)
    seeds = [d.seed for d in data]
    assert len(set(seeds)) == len(seeds)
    again = measure_all(make_w(3), design_settings(3), shots=200, seed=1)
    assert [d.histogram.tolist() for d in data] == [d.histogram.tolist() for d in again]


def test_setting_data_json_round_trip():
    d = sample_setting_data(make_w(3), design_settings(3)[2], 300, seed=2)
    doc = json.loads(json.dumps(d.to_json()))
    assert set(doc) == {"direction", "family", "shots", "correlators", "histogram", "seed"}
    back = SettingData.from_json(doc)
    np.testing.assert_array_equal(back.correlators, d.correlators)
    np.testing.assert_allclose(back.covariance, d.covariance)
    exact = exact_setting_data(make_w(3), Z).to_json()
    assert exact["shots"] == "exact" and exact["histogram"] is None
    with pytest.raises(ValidationError):
        SettingData.from_json({"family": "Z_AXIS"})


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_reconstruction_exact(n):
    rho = random_mixed(n, seed=50 + n)
    truth = coeffs_from_dense(rho)
    result = reconstruct_coefficients(measure_all(rho, design_settings(n)), n)
    assert set(result.coefficients) == set(criterion_coefficient_keys(n))
    assert len(result.all_coefficients) == parameter_count(n)
    for key, value in result.all_coefficients.items():
        assert value == pytest.approx(truth[key], abs=1e-12)
    report = result.criterion_report()
    dense = evaluate_criterion(coeffs_from_dense(rho))
    assert report.A == pytest.approx(dense.A, abs=1e-10)


def test_reconstruction_of_white_noise():
    n = 4
    rho = DensityMatrix(np.eye(16) / 16)
    result = reconstruct_coefficients(measure_all(rho, design_settings(n)), n)
    for value in result.coefficients.values():
        assert abs(value) < 1e-12


def test_reconstruction_errors():
    data = measure_all(make_w(3), design_settings(3))
    with pytest.raises(ReconstructionError):
        reconstruct_coefficients(data[1:], 3)
    with pytest.raises(ReconstructionError):
        reconstruct_coefficients(data[:2] + data[4:], 3)  # too few YZ settings
    with pytest.raises(ValidationError):
        reconstruct_coefficients(data, 4)


def test_ill_conditioned_design_rejected():
    # two nearly identical YZ directions make the n = 0 system singular
    n = 2
    t = 1e-13
    settings = [
        Z,
        MeasurementSetting((0.0, math.sin(0.3), math.cos(0.3)), Family.YZ_PLANE),
        MeasurementSetting((0.0, math.sin(0.3 + t), math.cos(0.3 + t)), Family.YZ_PLANE),
    ] + [s for s in design_settings(2) if s.family is Family.XZ_PLANE]
    with pytest.raises(ReconstructionError, match="ill-conditioned"):
        reconstruct_coefficients(measure_all(make_w(2), settings), n)


def test_three_qubit_closed_form_and_system_agree():
    rho = random_pi_state(3, seed=77)
    truth = coeffs_from_dense(rho)
    data = measure_all(rho, design_settings(3, preset="three-qubit"))
    e0210, e2010 = three_qubit_closed_form(data)
    assert e0210 == pytest.approx(truth[(0, 2, 1, 0)], abs=1e-13)
    assert e2010 == pytest.approx(truth[(2, 0, 1, 0)], abs=1e-13)
    result = reconstruct_coefficients(data, 3)
    assert result.coefficients[(0, 2, 1, 0)] == pytest.approx(e0210, abs=1e-13)


def test_shot_noise_standard_errors():
    rho = noisy_w(3, 0.5)
    truth = coeffs_from_dense(rho)
    result = reconstruct_coefficients(measure_all(rho, design_settings(3), shots=20_000, seed=11), 3)
    assert result.standard_errors is not None
    for key, value in result.coefficients.items():
        se = result.standard_errors[key]
        assert abs(value - truth[key]) <= 5 * se + 1e-12
    doc = result.to_json()
    assert {"condition_numbers", "residuals", "standard_errors", "coeffs"} <= set(doc)
