"""Permutationally invariant parts of N-qubit states and k-separability certification."""

from .coefficients import (
    PICoefficients,
    coeffs_from_dense,
    criterion_elements_from_coeffs,
    dense_from_coeffs,
    symmetrized_expectation,
)
from .concurrence import (
    KPartition,
    check_permutation_invariance,
    enumerate_k_partitions,
    kme_concurrence_pure,
)
from .estimators import PICoefficientEncoder, PIProjector, PITomography, SeparabilityCertifier
from .exceptions import (
    DimensionError,
    NumericalError,
    PisepError,
    ReconstructionError,
    UnsupportedInputError,
    ValidationError,
)
from .measurement import (
    MeasurementSetting,
    SettingData,
    design_settings,
    exact_setting_data,
    parameter_count,
    reconstruct_coefficients,
    sample_setting_data,
)
from .separability import (
    CriterionReport,
    Verdict,
    compute_abc,
    evaluate_criterion,
    maximize_over_bases,
    w_noise_detection_threshold,
    w_noise_keff,
)
from .states import (
    DensityMatrix,
    LocalBasisChange,
    PauliString,
    PureState,
    apply_local_basis,
    make_ghz,
    make_product,
    make_w,
    mix_white_noise,
    partial_trace,
    pauli_expectation,
)
from .symmetry import pi_distance, pi_project, pi_project_in_basis, pi_project_naive

__version__ = "0.1.0"
