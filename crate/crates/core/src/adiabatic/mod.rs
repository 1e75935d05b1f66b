//! Adiabatic paths, the adiabatic condition, discretized and Zeno
//! evolution, phase-estimation projections and the circuit compiler.

mod circuit;
mod evolution;
mod path;
mod phase;

pub use circuit::{
    compile_circuit, gate_matrix, input_index, prefix_states, random_circuit, simulatable_handle_for_step,
    sqrt_gate, Gate, GateKind, GateSequence, StepHandle, MAX_CIRCUIT_QUBITS,
};
pub use evolution::{
    evolve_discretized, groundstate_perturbation_bound, mixed_fidelity, sample_all_success,
    zeno_density_evolve, zeno_evolve, zeno_steps_for, EvolutionReport, PerturbationBound, ProjectionBackend, ZenoGrid,
    INITIAL_STATE_TOL,
};
pub use path::{
    check_adiabatic_condition, jagged_path, linear_path, projector_pair_gap, segment_min_gap,
    ConditionReport, HamiltonianPath, Schedule, DERIVATIVE_STEP,
};
pub use phase::{
    default_ancilla_bits, phase_estimation_project, projector_hamiltonian_sim, PhaseEstimator,
    ProjectorSimulation, MAX_ANCILLA_BITS,
};
