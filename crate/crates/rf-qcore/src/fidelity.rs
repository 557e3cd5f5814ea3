use crate::{QcoreError, UnitaryMatrix};

/// Which normalized trace overlap to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FidelityKind {
    /// `|Tr(a† b)| / d`
    #[default]
    Trace,
    /// `|Tr(a† b)|^2 / d^2`
    TraceSquared,
}

/// Global-phase-invariant gate fidelity `F = |Tr(a† b)| / d` in `[0, 1]`.
pub fn fidelity(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64, QcoreError> {
    fidelity_with(a, b, FidelityKind::Trace)
}

pub fn fidelity_with(a: &UnitaryMatrix, b: &UnitaryMatrix, kind: FidelityKind) -> Result<f64, QcoreError> {
    if a.dim() != b.dim() {
        return Err(QcoreError::DimMismatch(a.dim(), b.dim()));
    }
    let d = a.dim();
    // Tr(a† b) = sum_{r,c} conj(a[r][c]) b[r][c]
    let mut tr = crate::c64(0.0, 0.0);
    for (x, y) in a.entries().iter().zip(b.entries()) {
        tr += x.conj() * y;
    }
    let f = tr.norm() / d as f64;
    let f = match kind {
        FidelityKind::Trace => f,
        FidelityKind::TraceSquared => f * f,
    };
    Ok(f.min(1.0))
}

/// `d = 1 - F`.
pub fn distance(a: &UnitaryMatrix, b: &UnitaryMatrix) -> Result<f64, QcoreError> {
    Ok(1.0 - fidelity(a, b)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{c64, gate_matrix, GateKind, GateSpec};

    #[test]
    fn self_fidelity_is_one() {
        let u = gate_matrix(&GateSpec::one(GateKind::V2, 0, None), 1).unwrap();
        assert!((fidelity(&u, &u).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_vs_pauli_x_is_zero() {
        let i = UnitaryMatrix::identity(2);
        let x = UnitaryMatrix::new(2, vec![c64(0.0, 0.0), c64(1.0, 0.0), c64(1.0, 0.0), c64(0.0, 0.0)])
            .unwrap();
        assert!(fidelity(&i, &x).unwrap().abs() < 1e-14);
    }

    #[test]
    fn identity_vs_small_rz() {
        let i = UnitaryMatrix::identity(2);
        let rz = gate_matrix(&GateSpec::one(GateKind::Rz, 0, Some(std::f64::consts::PI / 128.0)), 1)
            .unwrap();
        let want = (std::f64::consts::PI / 256.0).cos();
        assert!((fidelity(&i, &rz).unwrap() - want).abs() < 1e-14);
        assert!((fidelity_with(&i, &rz, FidelityKind::TraceSquared).unwrap() - want * want).abs() < 1e-14);
    }

    #[test]
    fn symmetric_phase_invariant_and_bounded() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            let a = crate::haar_random_1q(&mut rng);
            let b = crate::haar_random_1q(&mut rng);
            let fab = fidelity(&a, &b).unwrap();
            let fba = fidelity(&b, &a).unwrap();
            assert!((fab - fba).abs() < 1e-13);
            assert!((0.0..=1.0).contains(&fab));
            // multiply b by a global phase
            let phi = 2.13_f64;
            let phased: Vec<_> = b.entries().iter().map(|z| z * c64(phi.cos(), phi.sin())).collect();
            let bp = UnitaryMatrix::new(b.dim(), phased).unwrap();
            assert!((fidelity(&a, &bp).unwrap() - fab).abs() < 1e-13);
            assert!((fidelity(&b, &bp).unwrap() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn dim_mismatch_is_an_error() {
        let a = UnitaryMatrix::identity(2);
        let b = UnitaryMatrix::identity(4);
        assert!(matches!(fidelity(&a, &b), Err(QcoreError::DimMismatch(2, 4))));
    }
}
