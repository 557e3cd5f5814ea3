use crate::{c64, C64, GateSpec, QcoreError};

/// Pure state on `n_qubits`, amplitudes indexed with qubit 0 as MSB.
#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amps: Vec<C64>,
}

impl Statevector {
    /// `|0...0>`.
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![c64(0.0, 0.0); 1 << n_qubits];
        amps[0] = c64(1.0, 0.0);
        Self { n_qubits, amps }
    }

    pub fn from_amplitudes(n_qubits: usize, amps: Vec<C64>) -> Self {
        assert_eq!(amps.len(), 1 << n_qubits);
        Self { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn apply_gate(&mut self, spec: &GateSpec) -> Result<(), QcoreError> {
        spec.validate(self.n_qubits)?;
        let local = spec.local_matrix()?;
        let shifts: Vec<usize> = spec.qubits.iter().map(|&q| self.n_qubits - 1 - q).collect();
        apply_local(&mut self.amps, &local, &shifts);
        Ok(())
    }

    pub fn apply_circuit(&mut self, gates: &[GateSpec]) -> Result<(), QcoreError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }
}

/// Apply a 2^k x 2^k local matrix to the subspace spanned by `shifts`
/// (bit positions from LSB, first shift = high bit of the local block).
pub(crate) fn apply_local(amps: &mut [C64], local: &[C64], shifts: &[usize]) {
    let k = shifts.len();
    let ldim = 1usize << k;
    debug_assert_eq!(local.len(), ldim * ldim);
    let gate_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    let dim = amps.len();
    let mut gathered = vec![c64(0.0, 0.0); ldim];
    for base in 0..dim {
        if base & gate_mask != 0 {
            continue;
        }
        for (sub, g) in gathered.iter_mut().enumerate() {
            *g = amps[base | expand(sub, shifts, k)];
        }
        for row in 0..ldim {
            let mut acc = c64(0.0, 0.0);
            for (col, &g) in gathered.iter().enumerate() {
                acc += local[row * ldim + col] * g;
            }
            amps[base | expand(row, shifts, k)] = acc;
        }
    }
}

#[inline]
fn expand(sub: usize, shifts: &[usize], k: usize) -> usize {
    let mut idx = 0usize;
    for (pos, &s) in shifts.iter().enumerate() {
        if (sub >> (k - 1 - pos)) & 1 == 1 {
            idx |= 1 << s;
        }
    }
    idx
}

/// Mixed state as a dense `2^n x 2^n` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    n_qubits: usize,
    entries: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let mut entries = vec![c64(0.0, 0.0); dim * dim];
        entries[0] = c64(1.0, 0.0);
        Self { n_qubits, entries }
    }

    pub fn from_statevector(psi: &Statevector) -> Self {
        let dim = psi.amps.len();
        let mut entries = vec![c64(0.0, 0.0); dim * dim];
        for r in 0..dim {
            for c in 0..dim {
                entries[r * dim + c] = psi.amps[r] * psi.amps[c].conj();
            }
        }
        Self { n_qubits: psi.n_qubits, entries }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim() + col]
    }

    pub fn trace(&self) -> C64 {
        let dim = self.dim();
        (0..dim).map(|i| self.entries[i * dim + i]).sum()
    }

    pub fn hermiticity_deviation(&self) -> f64 {
        let dim = self.dim();
        let mut acc: f64 = 0.0;
        for r in 0..dim {
            for c in 0..dim {
                acc += (self.entries[r * dim + c] - self.entries[c * dim + r].conj()).norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// `rho -> U rho U†` for the embedded gate.
    pub fn apply_gate(&mut self, spec: &GateSpec) -> Result<(), QcoreError> {
        spec.validate(self.n_qubits)?;
        let local = spec.local_matrix()?;
        let shifts: Vec<usize> = spec.qubits.iter().map(|&q| self.n_qubits - 1 - q).collect();
        let dim = self.dim();
        // left multiply: transform each column
        let mut col_buf = vec![c64(0.0, 0.0); dim];
        for col in 0..dim {
            for r in 0..dim {
                col_buf[r] = self.entries[r * dim + col];
            }
            apply_local(&mut col_buf, &local, &shifts);
            for r in 0..dim {
                self.entries[r * dim + col] = col_buf[r];
            }
        }
        // right multiply by U†: transform each row with conj(U)
        let conj_local: Vec<C64> = local.iter().map(|z| z.conj()).collect();
        for row in 0..dim {
            let slice = &mut self.entries[row * dim..(row + 1) * dim];
            apply_local(slice, &conj_local, &shifts);
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, gates: &[GateSpec]) -> Result<(), QcoreError> {
        for g in gates {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    pub(crate) fn entries_mut(&mut self) -> &mut Vec<C64> {
        &mut self.entries
    }
}
