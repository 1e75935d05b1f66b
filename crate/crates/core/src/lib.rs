//! Desk-scale simulation of adiabatic quantum state generation.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: exact dense linear algebra (states, Hermitian operators,
//!   eigendecompositions, exponentials), the reference every other module
//!   is checked against.
//! - [`sparse`]: coloring decomposition of row-sparse Hamiltonians into
//!   2×2 combinatorially block-diagonal pieces and symmetric Trotter
//!   simulation.
//! - [`adiabatic`]: Hamiltonian paths, the adiabatic condition,
//!   discretized and Zeno evolution, phase-estimation projections and the
//!   circuit-to-path compiler.
//! - [`markov`]: reversible chains, their Hamiltonians, slowly varying
//!   sequences and the perfect-matchings pipeline.
//! - [`szk`]: circuit output distributions, their Qsamples and the
//!   Hadamard-test deciders for statistical difference and number theory.

pub mod adiabatic;
pub mod error;
pub mod linalg;
pub mod markov;
pub mod seeding;
pub mod sparse;
pub mod szk;

pub use error::{Error, Result};
pub use linalg::{DenseHermitian, SpectralDecomposition, StateVector, UnitaryMatrix, C64};
pub use seeding::Rng;
