use nalgebra::DMatrix;

use crate::{C64, DensityMatrix, PauliSumHamiltonian, QcoreError};

const MAX_DENSE_QUBITS: usize = 12;

/// Smallest eigenvalue of the dense Hamiltonian matrix (exact diagonalization).
pub fn exact_ground_energy(h: &PauliSumHamiltonian) -> Result<f64, QcoreError> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(QcoreError::TooManyQubits(h.n_qubits()));
    }
    let dim = 1usize << h.n_qubits();
    let data = h.dense_matrix();
    Ok(hermitian_min_eigenvalue(dim, &data))
}

/// Smallest eigenvalue of a density matrix; used to check positive semidefiniteness.
pub fn min_eigenvalue(rho: &DensityMatrix) -> f64 {
    hermitian_min_eigenvalue(rho.dim(), rho.entries())
}

fn hermitian_min_eigenvalue(dim: usize, data: &[C64]) -> f64 {
    let m = DMatrix::from_fn(dim, dim, |r, c| data[r * dim + c]);
    let eig = m.symmetric_eigen();
    eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
}

/// Full eigen decomposition helper for tests: returns (eigenvalues, residual of
/// the ground pair `||H v - lambda v||`).
pub fn ground_pair_residual(h: &PauliSumHamiltonian) -> Result<(f64, f64), QcoreError> {
    if h.n_qubits() > MAX_DENSE_QUBITS {
        return Err(QcoreError::TooManyQubits(h.n_qubits()));
    }
    let dim = 1usize << h.n_qubits();
    let data = h.dense_matrix();
    let m = DMatrix::from_fn(dim, dim, |r, c| data[r * dim + c]);
    let eig = m.clone().symmetric_eigen();
    let (mut idx, mut best) = (0usize, f64::INFINITY);
    for (i, &v) in eig.eigenvalues.iter().enumerate() {
        if v < best {
            best = v;
            idx = i;
        }
    }
    let v = eig.eigenvectors.column(idx);
    let hv = &m * v;
    let residual = (hv - v * nalgebra::Complex::new(best, 0.0)).norm();
    Ok((best, residual))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::heisenberg_hamiltonian;

    #[test]
    fn single_z_ground_is_minus_one() {
        let h = PauliSumHamiltonian::parse("qubits: 1\n1.0 Z\n").unwrap();
        assert!((exact_ground_energy(&h).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn heisenberg_ground_energies() {
        // hand-checked by independent dense diagonalization
        let cases = [(2usize, -3.0), (3, -5.0), (4, -6.464101615138), (5, -8.711545013272)];
        for (n, want) in cases {
            let h = heisenberg_hamiltonian(n).unwrap();
            let got = exact_ground_energy(&h).unwrap();
            assert!((got - want).abs() < 1e-9, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn eigenpair_residual_is_small() {
        let h = heisenberg_hamiltonian(3).unwrap();
        let (_, residual) = ground_pair_residual(&h).unwrap();
        assert!(residual < 1e-8, "residual {residual}");
    }

    #[test]
    fn too_many_qubits_rejected() {
        let terms = vec![crate::PauliTerm::parse(1.0, &"Z".repeat(13)).unwrap()];
        let h = PauliSumHamiltonian::new(13, terms).unwrap();
        assert!(matches!(exact_ground_energy(&h), Err(QcoreError::TooManyQubits(13))));
    }
}
