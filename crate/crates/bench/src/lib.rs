//! Fixed, seeded inputs shared by the benchmarks.

use std::sync::Arc;

use qgen_core::adiabatic::{compile_circuit, GateSequence, HamiltonianPath};
use qgen_core::linalg::random_sparse_hermitian;
use qgen_core::sparse::{RowTable, SparseHamiltonian};
use qgen_core::DenseHermitian;

pub const SEED: u64 = 7;

/// Random row-sparse Hamiltonian on `n` qubits with sparsity `d` and `Λ = 1`.
pub fn sparse_instance(n: u32, d: usize) -> (DenseHermitian, SparseHamiltonian) {
    let h = random_sparse_hermitian(n, d, 1.0, SEED + u64::from(n)).expect("valid parameters");
    let sh = SparseHamiltonian::new(Arc::new(RowTable::from_dense(&h)), d, 1.0).expect("valid oracle");
    (h, sh)
}

/// Compiled path of a fixed 3-qubit circuit.
pub fn circuit_path() -> HamiltonianPath {
    let gates = GateSequence::parse("qubits 3\nH 0\nH 1\nCCX 0 1 2\nX 0\nH 2\n").expect("valid circuit");
    compile_circuit(&gates, &[false, false, false]).expect("circuit compiles")
}
