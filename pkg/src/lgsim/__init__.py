"""Temporal (Leggett-Garg) and spatio-temporal (Leggett-Garg-Bell)
inequality simulation for few-qubit systems.

The package is organized as a small stack: ``core`` holds the dense
density-matrix engine (states, propagators, Trotter steps, Kraus channels,
projective measurement), ``observables`` the two correlator engines,
``inequalities`` the third-order combinations and scans, ``mitigation`` the
readout confusion-matrix machinery, ``scenarios`` the prebuilt experiments,
and ``cli`` the command-line front end.
"""

from .core import (
    DensityMatrix,
    KrausChannel,
    NoiseModel,
    PauliSumHamiltonian,
    PauliTerm,
    Propagator,
    PureState,
    TrotterEvolution,
    TrotterPlan,
    apply_channel,
    dephasing_channel,
    depolarizing_channel,
    evolve_density,
    measure_projective,
    prepare_state,
    propagator,
    trotter_plan,
    trotter_propagator,
)
from .errors import (
    CalibrationTooLarge,
    ConfigError,
    InvalidChannel,
    InvalidDistribution,
    InvalidGrid,
    InvalidHamiltonian,
    InvalidNoiseParameter,
    InvalidObservable,
    InvalidPreparation,
    InvalidState,
    InvalidTrotterPlan,
    LgsimError,
    MitigationFailed,
    MixedMethodError,
    TooManyQubits,
)
from .inequalities import (
    Engine,
    InequalityResult,
    RegionScanResult,
    ScanResult,
    ThreeTimeSetup,
    assemble_third_order,
    closed_form_k3,
    joint_distribution_oracle,
    scan_to_csv,
    tau_scan,
    violation_region_scan,
)
from .mitigation import (
    ConfusionMatrix,
    CountsVector,
    calibrate,
    mitigate,
    mitigate_correlator,
)
from .observables import (
    CorrelatorEstimate,
    CountsTable,
    DichotomicObservable,
    MeasurementSchedule,
    exact_correlator,
    parity_observable,
    sampled_correlator,
    sigma_x_observable,
    sigma_z_observable,
)
from .scenarios import (
    ScenarioSpec,
    run_bell_pair,
    run_param_scan,
    run_single_qubit,
    run_tfic,
    run_transmon,
    transmon_closed_form,
)

__version__ = "0.1.0"

__all__ = [
    "CalibrationTooLarge",
    "ConfigError",
    "ConfusionMatrix",
    "CorrelatorEstimate",
    "CountsTable",
    "CountsVector",
    "DensityMatrix",
    "DichotomicObservable",
    "Engine",
    "InequalityResult",
    "InvalidChannel",
    "InvalidDistribution",
    "InvalidGrid",
    "InvalidHamiltonian",
    "InvalidNoiseParameter",
    "InvalidObservable",
    "InvalidPreparation",
    "InvalidState",
    "InvalidTrotterPlan",
    "KrausChannel",
    "LgsimError",
    "MeasurementSchedule",
    "MitigationFailed",
    "MixedMethodError",
    "NoiseModel",
    "PauliSumHamiltonian",
    "PauliTerm",
    "Propagator",
    "PureState",
    "RegionScanResult",
    "ScanResult",
    "ScenarioSpec",
    "ThreeTimeSetup",
    "TooManyQubits",
    "TrotterEvolution",
    "TrotterPlan",
    "apply_channel",
    "assemble_third_order",
    "calibrate",
    "closed_form_k3",
    "dephasing_channel",
    "depolarizing_channel",
    "evolve_density",
    "exact_correlator",
    "joint_distribution_oracle",
    "measure_projective",
    "mitigate",
    "mitigate_correlator",
    "parity_observable",
    "prepare_state",
    "propagator",
    "run_bell_pair",
    "run_param_scan",
    "run_single_qubit",
    "run_tfic",
    "run_transmon",
    "sampled_correlator",
    "scan_to_csv",
    "sigma_x_observable",
    "sigma_z_observable",
    "tau_scan",
    "transmon_closed_form",
    "trotter_plan",
    "trotter_propagator",
    "violation_region_scan",
]
