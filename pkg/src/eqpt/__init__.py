"""Estimation of unitary quantum processes from eigenstructure.

A family of estimators recovers a d x d unitary from the outputs of a
few structured mixed inputs plus one flat pure probe, using only dense
eigendecompositions, canonical correlations between eigensubspaces, and
element-wise phase fixing. The package also ships the simulation stack
used to exercise them: structured input factories, a parametric stand-in
for state-tomography noise, scoring metrics, a reproducible sweep
harness, and a command-line front end.
"""

__version__ = "0.1.0"

from .algorithms import (
    MODE_NONE,
    MODE_UNITARIZE_AFTER_PHASE,
    MODE_UNITARIZE_BEFORE_PHASE,
    Diagnostics,
    ProcessEstimate,
    eqpt1,
    eqpt1_general_input,
    eqpt1_mixed_probe,
    eqpt5,
    eqpt_two_stage,
    multi_stage_column_sets,
    resolve_phases_mixed,
    resolve_phases_pure,
    sorted_eigendecomposition,
)
from .benchmark import (
    DEFAULT_WIDTHS,
    METHODS,
    CellSummary,
    SweepConfig,
    TrialRecord,
    derive_seed,
    nmse,
    nrmse,
    paired_sign_test,
    run_trial,
    sweep,
)
from .estimators import (
    Eqpt1Estimator,
    Eqpt2Estimator,
    Eqpt3Estimator,
    Eqpt4Estimator,
    Eqpt5Estimator,
    GeneralInputEstimator,
    MixedProbeEstimator,
    TwoStageEstimator,
)
from .linalg import (
    NumericalError,
    cca_directions,
    cca_principal_direction,
    hermitian_eig,
    nearest_unitary,
    random_unitary,
    svd,
)
from .noise import (
    NoiseSpec,
    hermitian_unit_trace,
    noisy_density,
    noisy_ket,
    normalize_ket,
)
from .states import (
    DensityMatrix,
    apply_process_density,
    apply_process_ket,
    multi_stage_density,
    probe_ket,
    single_stage_density,
    two_stage_densities,
)

__all__ = [
    "__version__",
    "MODE_NONE",
    "MODE_UNITARIZE_AFTER_PHASE",
    "MODE_UNITARIZE_BEFORE_PHASE",
    "Diagnostics",
    "ProcessEstimate",
    "eqpt1",
    "eqpt1_general_input",
    "eqpt1_mixed_probe",
    "eqpt5",
    "eqpt_two_stage",
    "multi_stage_column_sets",
    "resolve_phases_mixed",
    "resolve_phases_pure",
    "sorted_eigendecomposition",
    "DEFAULT_WIDTHS",
    "METHODS",
    "CellSummary",
    "SweepConfig",
    "TrialRecord",
    "derive_seed",
    "nmse",
    "nrmse",
    "paired_sign_test",
    "run_trial",
    "sweep",
    "Eqpt1Estimator",
    "Eqpt2Estimator",
    "Eqpt3Estimator",
    "Eqpt4Estimator",
    "Eqpt5Estimator",
    "GeneralInputEstimator",
    "MixedProbeEstimator",
    "TwoStageEstimator",
    "NumericalError",
    "cca_directions",
    "cca_principal_direction",
    "hermitian_eig",
    "nearest_unitary",
    "random_unitary",
    "svd",
    "NoiseSpec",
    "hermitian_unit_trace",
    "noisy_density",
    "noisy_ket",
    "normalize_ket",
    "DensityMatrix",
    "apply_process_density",
    "apply_process_ket",
    "multi_stage_density",
    "probe_ket",
    "single_stage_density",
    "two_stage_densities",
]
