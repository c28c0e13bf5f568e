//! Fragment-based quantum state preparation toolkit.
//!
//! Builds qubit Hamiltonians from electronic-structure integrals, prepares
//! fragment ground states by Trotterized quantum phase estimation or by direct
//! statevector initialization, couples fragments with a UCC-style VQE,
//! extracts eigenvalues from autocorrelation series with Prony's method, and
//! evaluates CNOT resource estimates for both preparation schemes.

pub mod circuit;
pub mod cli;
pub mod direct_init;
pub mod error;
pub mod evolution;
pub mod fermion;
pub mod linalg;
pub mod numfmt;
pub mod pauli;
pub mod prony;
pub mod qpe;
pub mod rng;
pub mod resources;
pub mod statevector;
pub mod toys;
pub mod vqe;

pub use circuit::{Circuit, Gate, GateKind};
pub use error::{Error, Result};
pub use pauli::{Pauli, PauliString, PauliSum};
pub use statevector::Statevector;
