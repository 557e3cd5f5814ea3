use crate::{c64, C64, QcoreError};

/// Dense square complex matrix of dimension `2^n`, row-major.
///
/// Construction through [`UnitaryMatrix::new`] checks unitarity; the crate's
/// internal composition routines use the unchecked path because products of
/// unitaries stay unitary to machine precision.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl UnitaryMatrix {
    /// Unitarity tolerance used by the checked constructor (Frobenius norm of `U†U - I`).
    pub const UNITARY_TOL: f64 = 1e-10;

    pub fn new(dim: usize, data: Vec<C64>) -> Result<Self, QcoreError> {
        assert!(dim.is_power_of_two(), "dimension must be a power of two");
        assert_eq!(data.len(), dim * dim);
        let m = Self { dim, data };
        let dev = m.unitarity_deviation();
        if dev > Self::UNITARY_TOL {
            return Err(QcoreError::NotUnitary(dev));
        }
        Ok(m)
    }

    pub(crate) fn from_raw(dim: usize, data: Vec<C64>) -> Self {
        debug_assert_eq!(data.len(), dim * dim);
        Self { dim, data }
    }

    pub fn identity(dim: usize) -> Self {
        let mut data = vec![c64(0.0, 0.0); dim * dim];
        for i in 0..dim {
            data[i * dim + i] = c64(1.0, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_qubits(&self) -> usize {
        self.dim.trailing_zeros() as usize
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.data[row * self.dim + col]
    }

    pub fn dagger(&self) -> Self {
        let d = self.dim;
        let mut data = vec![c64(0.0, 0.0); d * d];
        for r in 0..d {
            for c in 0..d {
                data[c * d + r] = self.data[r * d + c].conj();
            }
        }
        Self { dim: d, data }
    }

    /// Matrix product `self * rhs`.
    pub fn mul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimension mismatch");
        let d = self.dim;
        let mut data = vec![c64(0.0, 0.0); d * d];
        for r in 0..d {
            for k in 0..d {
                let a = self.data[r * d + k];
                if a == c64(0.0, 0.0) {
                    continue;
                }
                for c in 0..d {
                    data[r * d + c] += a * rhs.data[k * d + c];
                }
            }
        }
        Self { dim: d, data }
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.data[i * self.dim + i]).sum()
    }

    /// Frobenius norm of `U†U - I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut acc = 0.0;
        for r in 0..d {
            for c in 0..d {
                // (U†U)[r][c] = sum_k conj(U[k][r]) U[k][c]
                let mut v = c64(0.0, 0.0);
                for k in 0..d {
                    v += self.data[k * d + r].conj() * self.data[k * d + c];
                }
                if r == c {
                    v -= c64(1.0, 0.0);
                }
                acc += v.norm_sqr();
            }
        }
        acc.sqrt()
    }

    /// Flattened `[re..., im...]` view used as an RL observation, length `2 * dim^2`.
    pub fn to_observation(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.data.len());
        out.extend(self.data.iter().map(|z| z.re));
        out.extend(self.data.iter().map(|z| z.im));
        out
    }

    /// Inverse of [`UnitaryMatrix::to_observation`]; `obs` must hold `2 * dim^2` reals.
    pub fn from_observation(dim: usize, obs: &[f64]) -> Self {
        assert_eq!(obs.len(), 2 * dim * dim);
        let n = dim * dim;
        let data = (0..n).map(|i| c64(obs[i], obs[n + i])).collect();
        Self { dim, data }
    }
}
