use std::fmt::Write as _;
use std::path::Path;

use crate::{c64, C64, DensityMatrix, QcoreError, Statevector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PauliOp {
    I,
    X,
    Y,
    Z,
}

impl PauliOp {
    fn from_char(ch: char) -> Option<Self> {
        match ch {
            'I' => Some(PauliOp::I),
            'X' => Some(PauliOp::X),
            'Y' => Some(PauliOp::Y),
            'Z' => Some(PauliOp::Z),
            _ => None,
        }
    }

    fn to_char(self) -> char {
        match self {
            PauliOp::I => 'I',
            PauliOp::X => 'X',
            PauliOp::Y => 'Y',
            PauliOp::Z => 'Z',
        }
    }
}

/// One weighted Pauli string, e.g. `1.0 * XXI`.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coeff: f64,
    pub ops: Vec<PauliOp>,
}

impl PauliTerm {
    pub fn parse(coeff: f64, string: &str) -> Result<Self, QcoreError> {
        let ops = string
            .chars()
            .map(|ch| {
                PauliOp::from_char(ch)
                    .ok_or_else(|| QcoreError::BadHamiltonianFile(format!("invalid Pauli character '{ch}'")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { coeff, ops })
    }

    pub fn string(&self) -> String {
        self.ops.iter().map(|op| op.to_char()).collect()
    }

    /// Bit mask of the flipped qubits (X and Y positions), plus per-index phase.
    fn mask_and_phase(&self, n_qubits: usize) -> (usize, impl Fn(usize) -> C64 + '_) {
        let mut mask = 0usize;
        for (q, op) in self.ops.iter().enumerate() {
            if matches!(op, PauliOp::X | PauliOp::Y) {
                mask |= 1 << (n_qubits - 1 - q);
            }
        }
        let phase = move |index: usize| -> C64 {
            let mut v = c64(1.0, 0.0);
            for (q, op) in self.ops.iter().enumerate() {
                let bit = (index >> (n_qubits - 1 - q)) & 1;
                match op {
                    PauliOp::I | PauliOp::X => {}
                    PauliOp::Y => {
                        v *= if bit == 0 { c64(0.0, 1.0) } else { c64(0.0, -1.0) };
                    }
                    PauliOp::Z => {
                        if bit == 1 {
                            v = -v;
                        }
                    }
                }
            }
            v
        };
        (mask, phase)
    }

    /// `<psi|P|psi>`.
    pub fn expectation_statevector(&self, psi: &Statevector) -> C64 {
        let n = psi.n_qubits();
        let (mask, phase) = self.mask_and_phase(n);
        let amps = psi.amplitudes();
        let mut acc = c64(0.0, 0.0);
        for a in 0..amps.len() {
            let b = a ^ mask;
            acc += amps[a].conj() * phase(b) * amps[b];
        }
        acc
    }

    /// `Tr(P rho)`.
    pub fn expectation_density(&self, rho: &DensityMatrix) -> C64 {
        let n = rho.n_qubits();
        let (mask, phase) = self.mask_and_phase(n);
        let dim = rho.dim();
        let mut acc = c64(0.0, 0.0);
        for a in 0..dim {
            acc += phase(a ^ mask) * rho.get(a ^ mask, a);
        }
        acc
    }
}

/// Weighted sum of Pauli strings; the cost operator of the architecture-search task.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliSumHamiltonian {
    n_qubits: usize,
    terms: Vec<PauliTerm>,
}

impl PauliSumHamiltonian {
    pub fn new(n_qubits: usize, terms: Vec<PauliTerm>) -> Result<Self, QcoreError> {
        for t in &terms {
            if t.ops.len() != n_qubits {
                return Err(QcoreError::BadHamiltonianFile(format!(
                    "term '{}' has length {}, expected {}",
                    t.string(),
                    t.ops.len(),
                    n_qubits
                )));
            }
            if !t.coeff.is_finite() {
                return Err(QcoreError::BadHamiltonianFile("non-finite coefficient".into()));
            }
        }
        Ok(Self { n_qubits, terms })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[PauliTerm] {
        &self.terms
    }

    /// `-sum_k |c_k|`, a crude lower bound on the spectrum used as the
    /// "desired minimum cost" when exact diagonalization is unavailable.
    pub fn coefficient_lower_bound(&self) -> f64 {
        -self.terms.iter().map(|t| t.coeff.abs()).sum::<f64>()
    }

    pub fn expectation_statevector(&self, psi: &Statevector) -> Result<f64, QcoreError> {
        if psi.n_qubits() != self.n_qubits {
            return Err(QcoreError::QubitCountMismatch { h: self.n_qubits, state: psi.n_qubits() });
        }
        let mut acc = c64(0.0, 0.0);
        for t in &self.terms {
            acc += t.coeff * t.expectation_statevector(psi);
        }
        Ok(acc.re)
    }

    pub fn expectation_density(&self, rho: &DensityMatrix) -> Result<f64, QcoreError> {
        if rho.n_qubits() != self.n_qubits {
            return Err(QcoreError::QubitCountMismatch { h: self.n_qubits, state: rho.n_qubits() });
        }
        let mut acc = c64(0.0, 0.0);
        for t in &self.terms {
            acc += t.coeff * t.expectation_density(rho);
        }
        Ok(acc.re)
    }

    /// Dense row-major matrix of the Hamiltonian.
    pub fn dense_matrix(&self) -> Vec<C64> {
        let dim = 1usize << self.n_qubits;
        let mut data = vec![c64(0.0, 0.0); dim * dim];
        for t in &self.terms {
            let (mask, phase) = t.mask_and_phase(self.n_qubits);
            for col in 0..dim {
                // P|col> = phase(col) |col ^ mask>
                data[(col ^ mask) * dim + col] += t.coeff * phase(col);
            }
        }
        data
    }

    /// Parse the textual Hamiltonian format:
    /// a `qubits: <n>` header, then one `<coefficient> <pauli-string>` per line.
    /// `#` starts a comment; blank lines are ignored.
    pub fn parse(text: &str) -> Result<Self, QcoreError> {
        let mut n_qubits: Option<usize> = None;
        let mut terms = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("qubits:") {
                let n = rest.trim().parse::<usize>().map_err(|_| {
                    QcoreError::BadHamiltonianFile(format!("line {}: bad qubit count", lineno + 1))
                })?;
                n_qubits = Some(n);
                continue;
            }
            let mut parts = line.split_whitespace();
            let coeff_str = parts.next().ok_or_else(|| {
                QcoreError::BadHamiltonianFile(format!("line {}: missing coefficient", lineno + 1))
            })?;
            let string = parts.next().ok_or_else(|| {
                QcoreError::BadHamiltonianFile(format!("line {}: missing Pauli string", lineno + 1))
            })?;
            if parts.next().is_some() {
                return Err(QcoreError::BadHamiltonianFile(format!(
                    "line {}: trailing tokens",
                    lineno + 1
                )));
            }
            let coeff = coeff_str.parse::<f64>().map_err(|_| {
                QcoreError::BadHamiltonianFile(format!("line {}: bad coefficient '{coeff_str}'", lineno + 1))
            })?;
            terms.push(PauliTerm::parse(coeff, string)?);
        }
        let n = n_qubits
            .ok_or_else(|| QcoreError::BadHamiltonianFile("missing 'qubits: <n>' header".into()))?;
        Self::new(n, terms)
    }

    pub fn load(path: &Path) -> Result<Self, QcoreError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "qubits: {}", self.n_qubits);
        for t in &self.terms {
            let _ = writeln!(out, "{} {}", t.coeff, t.string());
        }
        out
    }
}

/// Isotropic Heisenberg chain with uniform longitudinal field, open boundary:
/// nearest-neighbour `XX + YY + ZZ` couplings plus a `Z` field on every site.
/// Term count is `3(n-1) + n`, all coefficients 1.
pub fn heisenberg_hamiltonian(n: usize) -> Result<PauliSumHamiltonian, QcoreError> {
    if n < 2 {
        return Err(QcoreError::ChainTooShort(n));
    }
    let mut terms = Vec::with_capacity(3 * (n - 1) + n);
    for i in 0..n - 1 {
        for op in [PauliOp::X, PauliOp::Y, PauliOp::Z] {
            let mut ops = vec![PauliOp::I; n];
            ops[i] = op;
            ops[i + 1] = op;
            terms.push(PauliTerm { coeff: 1.0, ops });
        }
    }
    for i in 0..n {
        let mut ops = vec![PauliOp::I; n];
        ops[i] = PauliOp::Z;
        terms.push(PauliTerm { coeff: 1.0, ops });
    }
    PauliSumHamiltonian::new(n, terms)
}

/// Expectation `<psi| H |psi>` computed through the dense matrix, used as an
/// independent cross-check of the string-based fast path.
pub fn dense_expectation(h: &PauliSumHamiltonian, psi: &Statevector) -> f64 {
    let dim = 1usize << h.n_qubits();
    let m = h.dense_matrix();
    let amps = psi.amplitudes();
    let mut acc = c64(0.0, 0.0);
    for r in 0..dim {
        for c in 0..dim {
            acc += amps[r].conj() * m[r * dim + c] * amps[c];
        }
    }
    acc.re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{GateKind, GateSpec};

    #[test]
    fn z_on_zero_state_is_plus_one() {
        let h = PauliSumHamiltonian::parse("qubits: 1\n1.0 Z\n").unwrap();
        let psi = Statevector::zero(1);
        assert!((h.expectation_statevector(&psi).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn heisenberg_term_counts() {
        assert_eq!(heisenberg_hamiltonian(2).unwrap().terms().len(), 5);
        assert_eq!(heisenberg_hamiltonian(5).unwrap().terms().len(), 17);
        assert!(heisenberg_hamiltonian(2)
            .unwrap()
            .terms()
            .iter()
            .all(|t| (t.coeff - 1.0).abs() < 1e-15));
        assert!(matches!(heisenberg_hamiltonian(1), Err(QcoreError::ChainTooShort(1))));
    }

    #[test]
    fn singlet_energy_is_minus_three() {
        // (|01> - |10>)/sqrt(2)
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let psi = Statevector::from_amplitudes(
            2,
            vec![c64(0.0, 0.0), c64(s, 0.0), c64(-s, 0.0), c64(0.0, 0.0)],
        );
        let h = heisenberg_hamiltonian(2).unwrap();
        assert!((h.expectation_statevector(&psi).unwrap() + 3.0).abs() < 1e-12);
    }

    #[test]
    fn fast_expectation_matches_dense_oracle_on_random_3q_states() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = heisenberg_hamiltonian(3).unwrap();
        for _ in 0..20 {
            let mut psi = Statevector::zero(3);
            for q in 0..3 {
                psi.apply_gate(&GateSpec::one(GateKind::Ry, q, Some(rng.gen_range(-3.0..3.0))))
                    .unwrap();
                psi.apply_gate(&GateSpec::one(GateKind::Rz, q, Some(rng.gen_range(-3.0..3.0))))
                    .unwrap();
            }
            psi.apply_gate(&GateSpec::two(GateKind::Cnot, 0, 2, None)).unwrap();
            let fast = h.expectation_statevector(&psi).unwrap();
            let dense = dense_expectation(&h, &psi);
            assert!((fast - dense).abs() < 1e-9, "{fast} vs {dense}");
        }
    }

    #[test]
    fn expectation_is_linear_in_coefficients() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let h = heisenberg_hamiltonian(3).unwrap();
        let mut psi = Statevector::zero(3);
        for q in 0..3 {
            psi.apply_gate(&GateSpec::one(GateKind::Rx, q, Some(rng.gen_range(-2.0..2.0))))
                .unwrap();
        }
        let base = h.expectation_statevector(&psi).unwrap();
        for _ in 0..5 {
            let lambda: f64 = rng.gen_range(-4.0..4.0);
            let scaled_terms = h
                .terms()
                .iter()
                .map(|t| PauliTerm { coeff: lambda * t.coeff, ops: t.ops.clone() })
                .collect();
            let scaled = PauliSumHamiltonian::new(3, scaled_terms).unwrap();
            let got = scaled.expectation_statevector(&psi).unwrap();
            assert!((got - lambda * base).abs() < 1e-9);
        }
    }

    #[test]
    fn parse_round_trip_and_errors() {
        let text = "qubits: 2\n# comment line\n1.0 XX\n0.5 ZI   # inline\n\n-0.25 YY\n";
        let h = PauliSumHamiltonian::parse(text).unwrap();
        assert_eq!(h.n_qubits(), 2);
        assert_eq!(h.terms().len(), 3);
        let again = PauliSumHamiltonian::parse(&h.to_text()).unwrap();
        assert_eq!(h, again);

        assert!(PauliSumHamiltonian::parse("1.0 XX\n").is_err()); // no header
        assert!(PauliSumHamiltonian::parse("qubits: 2\nfoo XX\n").is_err());
        assert!(PauliSumHamiltonian::parse("qubits: 2\n1.0 XQX\n").is_err());
        assert!(PauliSumHamiltonian::parse("qubits: 2\n1.0 XXX\n").is_err()); // wrong length
    }
}
