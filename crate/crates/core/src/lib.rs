//! Statevector simulation of branched-subspace adiabatic preparation (B-SAP)
//! for eigenstates of the periodic XYZ Heisenberg ring.
//!
//! The crate covers the whole pipeline: Pauli-string Hamiltonians and a dense
//! diagonalization oracle, the domain-wall map between ring configurations
//! and Hamming-weight branches, the Givens-rotation gate set that explores a
//! degenerate branch, Trotterized adiabatic evolution, the multistate
//! contracted eigensolver on the evolved branch, and coupling-grid sweeps.

pub mod adiabatic;
pub mod circuit;
pub mod eigen;
pub mod error;
pub mod experiment;
pub mod gates;
pub mod hamiltonian;
pub mod linalg;
pub mod mcvqe;
pub mod pauli;
pub mod statevector;
pub mod subspace;

pub use error::{Error, Result};
pub use hamiltonian::{Couplings, Hamiltonian, ScheduleFunction};
pub use statevector::{GateMatrix, StateVector, C64};
pub use subspace::{Bitstring, Branch, Parity, SubspaceBasis};
