use rand::Rng;

use crate::pauli::PauliOp;
use crate::{c64, C64, DensityMatrix, GateSpec, PauliSumHamiltonian, QcoreError, Statevector};

/// Non-identity Pauli strings over `k` qubits (3 for k=1, 15 for k=2).
fn non_identity_paulis(k: usize) -> Vec<Vec<PauliOp>> {
    let singles = [PauliOp::I, PauliOp::X, PauliOp::Y, PauliOp::Z];
    let mut out = Vec::new();
    for idx in 1..4usize.pow(k as u32) {
        let mut ops = Vec::with_capacity(k);
        let mut v = idx;
        for _ in 0..k {
            ops.push(singles[v % 4]);
            v /= 4;
        }
        out.push(ops);
    }
    out
}

/// `rho[a][b] -> phase(a^mask) conj(phase(b^mask)) rho[a^mask][b^mask]`
/// for the Pauli `ops` acting on `qubits`; conjugation `P rho P†` in place of a copy.
fn pauli_conjugate(rho: &DensityMatrix, qubits: &[usize], ops: &[PauliOp]) -> Vec<C64> {
    let n = rho.n_qubits();
    let dim = rho.dim();
    let mut mask = 0usize;
    for (&q, op) in qubits.iter().zip(ops) {
        if matches!(op, PauliOp::X | PauliOp::Y) {
            mask |= 1 << (n - 1 - q);
        }
    }
    let phase = |index: usize| -> C64 {
        let mut v = c64(1.0, 0.0);
        for (&q, op) in qubits.iter().zip(ops) {
            let bit = (index >> (n - 1 - q)) & 1;
            match op {
                PauliOp::I | PauliOp::X => {}
                PauliOp::Y => v *= if bit == 0 { c64(0.0, 1.0) } else { c64(0.0, -1.0) },
                PauliOp::Z => {
                    if bit == 1 {
                        v = -v;
                    }
                }
            }
        }
        v
    };
    let mut out = vec![c64(0.0, 0.0); dim * dim];
    for a in 0..dim {
        let pa = phase(a ^ mask);
        for b in 0..dim {
            out[a * dim + b] = pa * phase(b ^ mask).conj() * rho.get(a ^ mask, b ^ mask);
        }
    }
    out
}

/// k-qubit depolarizing channel on the given qubits: with probability `p` a
/// uniformly random Pauli (identity included) hits the targets,
/// `rho -> (1-p) rho + (p/4^k) sum_P P rho P†`,
/// which mixes the targeted subsystem toward the maximally mixed state and
/// replaces it entirely at `p = 1`.
pub fn apply_depolarizing(
    rho: &DensityMatrix,
    qubits: &[usize],
    p: f64,
) -> Result<DensityMatrix, QcoreError> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(QcoreError::BadProbability(p));
    }
    let n = rho.n_qubits();
    for &q in qubits {
        if q >= n {
            return Err(QcoreError::QubitOutOfRange { index: q, n_qubits: n });
        }
    }
    assert!(qubits.len() == 1 || qubits.len() == 2, "1- or 2-qubit channel only");
    if p == 0.0 {
        return Ok(rho.clone());
    }
    let k = qubits.len();
    let weight = p / 4f64.powi(k as i32);
    let mut out = rho.clone();
    for v in out.entries_mut().iter_mut() {
        *v *= 1.0 - p + weight; // identity term of the mixture folded in
    }
    for ops in non_identity_paulis(k) {
        let conj = pauli_conjugate(rho, qubits, &ops);
        for (o, c) in out.entries_mut().iter_mut().zip(conj) {
            *o += weight * c;
        }
    }
    Ok(out)
}

/// Kraus operators of the channel as full-space matrices; exposed so the CPTP
/// property `sum K†K = I` can be checked directly.
pub fn depolarizing_kraus(n_qubits: usize, qubits: &[usize], p: f64) -> Vec<Vec<C64>> {
    let k = qubits.len();
    let dim = 1usize << n_qubits;
    let uniform = p / 4f64.powi(k as i32);
    let weight = uniform.sqrt();
    let mut kraus = Vec::new();
    let mut identity = vec![c64(0.0, 0.0); dim * dim];
    for i in 0..dim {
        identity[i * dim + i] = c64((1.0 - p + uniform).sqrt(), 0.0);
    }
    kraus.push(identity);
    for ops in non_identity_paulis(k) {
        let mut m = vec![c64(0.0, 0.0); dim * dim];
        let mut mask = 0usize;
        for (&q, op) in qubits.iter().zip(&ops) {
            if matches!(op, PauliOp::X | PauliOp::Y) {
                mask |= 1 << (n_qubits - 1 - q);
            }
        }
        for col in 0..dim {
            let mut v = c64(weight, 0.0);
            for (&q, op) in qubits.iter().zip(&ops) {
                let bit = (col >> (n_qubits - 1 - q)) & 1;
                match op {
                    PauliOp::I | PauliOp::X => {}
                    PauliOp::Y => v *= if bit == 0 { c64(0.0, 1.0) } else { c64(0.0, -1.0) },
                    PauliOp::Z => {
                        if bit == 1 {
                            v = -v;
                        }
                    }
                }
            }
            m[(col ^ mask) * dim + col] = v;
        }
        kraus.push(m);
    }
    kraus
}

/// Noise strengths: `p1` after every single-qubit gate, `p2` after every
/// two-qubit gate, applied to the qubits the gate touched.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub p1: f64,
    pub p2: f64,
}

impl NoiseModel {
    pub fn strength_for(&self, gate: &GateSpec) -> f64 {
        if gate.kind.n_qubits() == 1 {
            self.p1
        } else {
            self.p2
        }
    }
}

/// Exact noisy expectation via density-matrix evolution.
pub fn noisy_expectation_density(
    gates: &[GateSpec],
    h: &PauliSumHamiltonian,
    noise: NoiseModel,
) -> Result<f64, QcoreError> {
    let n = h.n_qubits();
    let mut rho = DensityMatrix::zero_state(n);
    for g in gates {
        rho.apply_gate(g)?;
        let p = noise.strength_for(g);
        if p > 0.0 {
            rho = apply_depolarizing(&rho, &g.qubits, p)?;
        }
    }
    h.expectation_density(&rho)
}

/// Monte-Carlo Pauli-trajectory estimate of the noisy expectation: after each
/// gate, with probability `p` one uniformly chosen Pauli (identity included)
/// acts on the touched qubits. Unbiased for the depolarizing channel.
pub fn noisy_expectation_trajectories<R: Rng>(
    gates: &[GateSpec],
    h: &PauliSumHamiltonian,
    noise: NoiseModel,
    trajectories: usize,
    rng: &mut R,
) -> Result<f64, QcoreError> {
    let n = h.n_qubits();
    let mut acc = 0.0;
    for _ in 0..trajectories.max(1) {
        let mut psi = Statevector::zero(n);
        for g in gates {
            psi.apply_gate(g)?;
            let p = noise.strength_for(g);
            if p > 0.0 && rng.gen::<f64>() < p {
                // uniform over all 4^k Paulis; index 0 is the identity no-op
                let choices = non_identity_paulis(g.qubits.len());
                let idx = rng.gen_range(0..=choices.len());
                if idx == 0 {
                    continue;
                }
                let ops = &choices[idx - 1];
                for (&q, op) in g.qubits.iter().zip(ops) {
                    let gate = match op {
                        PauliOp::I => continue,
                        PauliOp::X => GateSpec::one(crate::GateKind::Rx, q, Some(std::f64::consts::PI)),
                        PauliOp::Y => GateSpec::one(crate::GateKind::Ry, q, Some(std::f64::consts::PI)),
                        PauliOp::Z => GateSpec::one(crate::GateKind::Rz, q, Some(std::f64::consts::PI)),
                    };
                    // R_P(pi) = -i P; the global phase cancels in expectations.
                    psi.apply_gate(&gate)?;
                }
            }
        }
        acc += h.expectation_statevector(&psi)?;
    }
    Ok(acc / trajectories.max(1) as f64)
}
