//! Dense statevector simulation.
//!
//! Qubit `0` is the most significant bit of a basis index: on `m` qubits,
//! qubit `q` is bit `m - 1 - q`. Registers are laid out most-significant
//! first, so a state over `[ancilla, system]` has its ancilla-zero block in
//! the first `2^s` amplitudes.

mod circuit;
mod gate;
mod sim;
mod state;

pub use circuit::{Circuit, Layout, QueryCount, Register};
pub use gate::{Charge, Control, DenseOp, Gate, GateKind, OracleBlock, C64};
pub use sim::{apply_gate_in_place, dense_block, dense_unitary, Program, DEFAULT_DENSE_CAP};
pub use state::{fidelity, ProjectionOutcome, QuantumState, DEFAULT_PROBABILITY_FLOOR, NORM_TOL};

/// Apply one gate to a state.
pub fn apply_gate(state: &QuantumState, gate: &Gate) -> crate::Result<QuantumState> {
    state.apply_gate(gate)
}

/// Run a circuit on a state, returning the output and the oracle queries used.
pub fn run_circuit(initial: &QuantumState, circuit: &Circuit) -> crate::Result<(QuantumState, QueryCount)> {
    initial.run(circuit)
}

/// Project `qubits` onto `outcome` with the default probability floor.
pub fn project(state: &QuantumState, qubits: &[usize], outcome: &[bool]) -> crate::Result<ProjectionOutcome> {
    state.project(qubits, outcome)
}
