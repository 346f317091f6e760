"""Oscillator-assisted geometric two-qubit gates under oscillator dissipation.

Two independent engines compute the same dissipative gate dynamics: a
closed-form superoperator solution (`analytic`) and a brute-force fixed-step
master-equation integrator on a truncated Fock space (`oracle`).  Drive
schedules, including time-reversal symmetrized (Thue-Morse) sequences, live
in `schedules`; the two-qubit Jy algebra and fidelity in `qubits`; sweeps and
cross-validation in `experiments`.
"""
from . import analytic, experiments, fock, oracle, qubits, schedules
from .analytic import (
    ReducedPropagationInput,
    SolutionCoefficients,
    apply_lambda,
    coefficients,
    coefficients_csv,
    evolve_reduced,
    geometric_phase,
    relax_channel,
)
from .errors import (
    ConvergenceError,
    InvalidParameterError,
    InvalidStateError,
    NumericalConsistencyError,
    QuadratureError,
    TruncationOverflowError,
    TruncationWarning,
)
from .experiments import (
    CrossValidationReport,
    SweepConfig,
    SweepResult,
    config_text,
    cross_validate,
    emit_paths,
    parse_config,
    run_sweep,
)
from .oracle import (
    IntegratorConfig,
    JointState,
    build_hamiltonian,
    coherent_state,
    default_integrator_config,
    evolve_master,
    fock_dimension,
    nojump_factorized_target,
    nojump_propagator,
    partial_trace_osc,
    product_state,
)
from .qubits import (
    GateTarget,
    JyBasis,
    QubitState,
    entangled_target,
    from_jy_basis,
    gate_fidelity,
    ideal_gate,
    jy_matrix,
    jy_transform,
    qubit_00,
    state_from_csv,
    state_to_csv,
    to_jy_basis,
)
from .schedules import (
    PulseSchedule,
    PulseSegment,
    SequenceSpec,
    circular_circuit,
    integrate_alpha,
    moment,
    phase_space_path,
    schedule_from_text,
    schedule_to_text,
    step_circuit,
    symmetrized_sequence,
    thue_morse_orientations,
    time_reverse,
)

__version__ = "0.1.0"
