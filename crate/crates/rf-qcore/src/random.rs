use rand::Rng;
use rand_distr::StandardNormal;

use crate::{c64, gate_matrix, GateKind, GateSpec, UnitaryMatrix};

const SMALL_ANGLE: f64 = std::f64::consts::PI / 128.0;

/// Haar-random element of U(2): QR of a complex Ginibre matrix via
/// Gram-Schmidt, whose R has a positive real diagonal by construction.
pub fn haar_random_1q<R: Rng>(rng: &mut R) -> UnitaryMatrix {
    let mut g = [c64(0.0, 0.0); 4];
    for v in &mut g {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v = c64(re, im);
    }
    // columns a1 = (g0, g2), a2 = (g1, g3)
    let n1 = (g[0].norm_sqr() + g[2].norm_sqr()).sqrt();
    let q1 = [g[0] / n1, g[2] / n1];
    let r12 = q1[0].conj() * g[1] + q1[1].conj() * g[3];
    let w = [g[1] - r12 * q1[0], g[3] - r12 * q1[1]];
    let n2 = (w[0].norm_sqr() + w[1].norm_sqr()).sqrt();
    let q2 = [w[0] / n2, w[1] / n2];
    UnitaryMatrix::from_raw(2, vec![q1[0], q2[0], q1[1], q2[1]])
}

/// The eight-element two-qubit compiling basis:
/// `RZ(±π/128)⊗I, I⊗RZ(±π/128), XX(±π/128), YY(±π/128)`.
pub fn two_qubit_basis() -> Vec<GateSpec> {
    let mut out = Vec::with_capacity(8);
    for sign in [1.0, -1.0] {
        out.push(GateSpec::one(GateKind::Rz, 0, Some(sign * SMALL_ANGLE)));
        out.push(GateSpec::one(GateKind::Rz, 1, Some(sign * SMALL_ANGLE)));
        out.push(GateSpec::two(GateKind::Xx, 0, 1, Some(sign * SMALL_ANGLE)));
        out.push(GateSpec::two(GateKind::Yy, 0, 1, Some(sign * SMALL_ANGLE)));
    }
    out
}

/// Compose `length` gates drawn uniformly from `basis`, left-multiplying each
/// new gate onto the accumulated product.
pub fn compose_circuit_target<R: Rng>(
    basis: &[GateSpec],
    n_qubits: usize,
    length: usize,
    rng: &mut R,
) -> UnitaryMatrix {
    let mut u = UnitaryMatrix::identity(1 << n_qubits);
    for _ in 0..length {
        let g = &basis[rng.gen_range(0..basis.len())];
        let m = gate_matrix(g, n_qubits).expect("basis gate must be valid");
        u = m.mul(&u);
    }
    u
}

/// Two-qubit target generation: circuit length `N ~ Uniform{6, ..., 10^4 - 1}`
/// over the two-qubit compiling basis.
pub fn random_2q_target<R: Rng>(rng: &mut R) -> UnitaryMatrix {
    let basis = two_qubit_basis();
    let n = rng.gen_range(6..10_000usize);
    compose_circuit_target(&basis, 2, n, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn haar_unitarity_over_many_draws() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for _ in 0..10_000 {
            let u = haar_random_1q(&mut rng);
            assert!(u.unitarity_deviation() < 1e-10);
        }
    }

    #[test]
    fn haar_second_moment_near_one() {
        // E |Tr U|^2 = 1 over the Haar measure on U(2).
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        let n = 100_000;
        let samples: Vec<f64> = (0..n)
            .map(|_| {
                let u = haar_random_1q(&mut rng);
                u.trace().norm_sqr()
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let var = samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let se = (var / n as f64).sqrt();
        assert!((mean - 1.0).abs() < 4.0 * se, "mean {mean} se {se}");
    }

    #[test]
    fn different_seeds_differ() {
        let mut a = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut b = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let ua = haar_random_1q(&mut a);
        let ub = haar_random_1q(&mut b);
        let diff: f64 = ua
            .entries()
            .iter()
            .zip(ub.entries())
            .map(|(x, y)| (x - y).norm())
            .sum();
        assert!(diff > 1e-6);
    }

    #[test]
    fn forced_composition_matches_angle_addition() {
        // Six draws of RZ(pi/128) x I compose to RZ(6 pi/128) x I.
        let basis = vec![GateSpec::one(GateKind::Rz, 0, Some(SMALL_ANGLE))];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0);
        let got = compose_circuit_target(&basis, 2, 6, &mut rng);
        let want = gate_matrix(&GateSpec::one(GateKind::Rz, 0, Some(6.0 * SMALL_ANGLE)), 2).unwrap();
        for (a, b) in got.entries().iter().zip(want.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
        // and against a six-fold explicit matrix product
        let m = gate_matrix(&basis[0], 2).unwrap();
        let mut prod = UnitaryMatrix::identity(4);
        for _ in 0..6 {
            prod = m.mul(&prod);
        }
        for (a, b) in got.entries().iter().zip(prod.entries()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn random_2q_target_is_unitary_4x4() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..3 {
            let u = random_2q_target(&mut rng);
            assert_eq!(u.dim(), 4);
            assert!(u.unitarity_deviation() < 1e-9);
        }
    }
}
