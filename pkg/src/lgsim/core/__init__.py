"""Dense state / density-matrix engine: states, propagators, channels,
projective measurement."""

from .channels import (
    KrausChannel,
    NoiseModel,
    amplitude_damping_channel,
    apply_channel,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    relaxation_channels,
)
from .evolution import (
    Propagator,
    TrotterEvolution,
    TrotterPlan,
    evolve_density,
    propagator,
    trotter_plan,
    trotter_propagator,
    trotter_step_unitary,
)
from .measurement import MeasurementResult, measure_projective
from .paulis import (
    MAX_QUBITS,
    PAULI_MATRICES,
    PauliSumHamiltonian,
    PauliTerm,
    embed_operator,
    pauli_string_matrix,
    single_site_term,
    two_site_term,
)
from .states import DensityMatrix, PureState, prepare_state

__all__ = [
    "MAX_QUBITS",
    "PAULI_MATRICES",
    "DensityMatrix",
    "KrausChannel",
    "MeasurementResult",
    "NoiseModel",
    "PauliSumHamiltonian",
    "PauliTerm",
    "Propagator",
    "PureState",
    "TrotterEvolution",
    "TrotterPlan",
    "amplitude_damping_channel",
    "apply_channel",
    "dephasing_channel",
    "depolarizing_channel",
    "embed_operator",
    "evolve_density",
    "identity_channel",
    "measure_projective",
    "pauli_string_matrix",
    "prepare_state",
    "propagator",
    "relaxation_channels",
    "single_site_term",
    "trotter_plan",
    "trotter_propagator",
    "trotter_step_unitary",
    "two_site_term",
]
