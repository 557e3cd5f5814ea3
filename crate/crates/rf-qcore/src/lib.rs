//! Quantum core: dense complex matrices, gates, statevector and density-matrix
//! simulation, depolarizing noise, Pauli-sum Hamiltonians and fidelity metrics.
//!
//! Conventions used throughout the crate:
//! - matrices are row-major, dimension `2^n`;
//! - qubit 0 is the most significant bit of a basis index, so `CNOT(0 -> 1)`
//!   on two qubits maps `|10>` to `|11>`;
//! - rotation gates use the half-angle convention `R_P(theta) = exp(-i theta/2 P)`.

mod error;
mod fidelity;
mod gates;
mod matrix;
mod noise;
mod pauli;
mod random;
mod spectrum;
mod states;

pub use error::QcoreError;
pub use fidelity::{distance, fidelity, fidelity_with, FidelityKind};
pub use gates::{gate_matrix, GateKind, GateSpec};
pub use matrix::UnitaryMatrix;
pub use noise::{
    apply_depolarizing, depolarizing_kraus, noisy_expectation_density,
    noisy_expectation_trajectories, NoiseModel,
};
pub use pauli::{dense_expectation, heisenberg_hamiltonian, PauliSumHamiltonian, PauliTerm};
pub use random::{compose_circuit_target, haar_random_1q, random_2q_target, two_qubit_basis};
pub use spectrum::{exact_ground_energy, ground_pair_residual, min_eigenvalue};
pub use states::{DensityMatrix, Statevector};

pub type C64 = num_complex::Complex64;

/// Shorthand for `Complex64::new`.
#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
