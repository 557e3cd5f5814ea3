use crate::{c64, C64, QcoreError, UnitaryMatrix};

/// Gate vocabulary shared by the compiling and architecture-search tasks.
///
/// `V1`/`V2`/`V3` form the Harrow-Recht-Chuang universal single-qubit basis.
/// `Xx`/`Yy` are the fixed-increment two-qubit rotations of the compiling
/// action set; `Rxx`/`Ryy`/`Rzz` are the same generators with a free angle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    Rx,
    Ry,
    Rz,
    Cnot,
    Rxx,
    Ryy,
    Rzz,
    Xx,
    Yy,
    V1,
    V2,
    V3,
}

impl GateKind {
    pub fn n_qubits(self) -> usize {
        match self {
            GateKind::Rx | GateKind::Ry | GateKind::Rz | GateKind::V1 | GateKind::V2 | GateKind::V3 => 1,
            _ => 2,
        }
    }

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            GateKind::Rx
                | GateKind::Ry
                | GateKind::Rz
                | GateKind::Rxx
                | GateKind::Ryy
                | GateKind::Rzz
                | GateKind::Xx
                | GateKind::Yy
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Rx => "RX",
            GateKind::Ry => "RY",
            GateKind::Rz => "RZ",
            GateKind::Cnot => "CNOT",
            GateKind::Rxx => "RXX",
            GateKind::Ryy => "RYY",
            GateKind::Rzz => "RZZ",
            GateKind::Xx => "XX",
            GateKind::Yy => "YY",
            GateKind::V1 => "V1",
            GateKind::V2 => "V2",
            GateKind::V3 => "V3",
        }
    }
}

/// One concrete gate placement: kind, target qubit(s) and optional angle.
#[derive(Debug, Clone, PartialEq)]
pub struct GateSpec {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
    pub angle: Option<f64>,
}

impl GateSpec {
    pub fn one(kind: GateKind, qubit: usize, angle: Option<f64>) -> Self {
        Self { kind, qubits: vec![qubit], angle }
    }

    pub fn two(kind: GateKind, a: usize, b: usize, angle: Option<f64>) -> Self {
        Self { kind, qubits: vec![a, b], angle }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<(), QcoreError> {
        let expected = self.kind.n_qubits();
        if self.qubits.len() != expected {
            return Err(QcoreError::WrongQubitCount {
                kind: self.kind.name(),
                expected,
                got: self.qubits.len(),
            });
        }
        for &q in &self.qubits {
            if q >= n_qubits {
                return Err(QcoreError::QubitOutOfRange { index: q, n_qubits });
            }
        }
        if self.qubits.len() == 2 && self.qubits[0] == self.qubits[1] {
            return Err(QcoreError::DuplicateQubit(self.qubits[0]));
        }
        match (self.kind.is_parameterized(), self.angle) {
            (true, None) => Err(QcoreError::MissingAngle(self.kind.name())),
            (false, Some(_)) => Err(QcoreError::UnexpectedAngle(self.kind.name())),
            _ => Ok(()),
        }
    }

    /// The gate as a matrix on its own subspace (2x2 or 4x4).
    pub fn local_matrix(&self) -> Result<Vec<C64>, QcoreError> {
        let angle = self.angle;
        let need = |name| angle.ok_or(QcoreError::MissingAngle(name));
        Ok(match self.kind {
            GateKind::Rx => rx(need("RX")?),
            GateKind::Ry => ry(need("RY")?),
            GateKind::Rz => rz(need("RZ")?),
            GateKind::V1 => {
                let s = 1.0 / 5.0_f64.sqrt();
                vec![c64(s, 0.0), c64(0.0, 2.0 * s), c64(0.0, 2.0 * s), c64(s, 0.0)]
            }
            GateKind::V2 => {
                let s = 1.0 / 5.0_f64.sqrt();
                vec![c64(s, 0.0), c64(2.0 * s, 0.0), c64(-2.0 * s, 0.0), c64(s, 0.0)]
            }
            GateKind::V3 => {
                let s = 1.0 / 5.0_f64.sqrt();
                vec![c64(s, 2.0 * s), c64(0.0, 0.0), c64(0.0, 0.0), c64(s, -2.0 * s)]
            }
            GateKind::Cnot => {
                let (o, l) = (c64(0.0, 0.0), c64(1.0, 0.0));
                // first qubit of the pair is the control
                vec![
                    l, o, o, o, //
                    o, l, o, o, //
                    o, o, o, l, //
                    o, o, l, o,
                ]
            }
            GateKind::Rxx | GateKind::Xx => xx(need("RXX")?),
            GateKind::Ryy | GateKind::Yy => yy(need("RYY")?),
            GateKind::Rzz => zz(need("RZZ")?),
        })
    }
}

fn rx(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    vec![c64(c, 0.0), c64(0.0, -s), c64(0.0, -s), c64(c, 0.0)]
}

fn ry(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    vec![c64(c, 0.0), c64(-s, 0.0), c64(s, 0.0), c64(c, 0.0)]
}

fn rz(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let o = c64(0.0, 0.0);
    vec![c64(c, -s), o, o, c64(c, s)]
}

/// `exp(-i theta/2 X⊗X)`: cosine diagonal, `-i sin` anti-diagonal.
fn xx(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (o, cc, ss) = (c64(0.0, 0.0), c64(c, 0.0), c64(0.0, -s));
    vec![
        cc, o, o, ss, //
        o, cc, ss, o, //
        o, ss, cc, o, //
        ss, o, o, cc,
    ]
}

/// `exp(-i theta/2 Y⊗Y)`.
fn yy(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let (o, cc) = (c64(0.0, 0.0), c64(c, 0.0));
    let (p, m) = (c64(0.0, s), c64(0.0, -s));
    vec![
        cc, o, o, p, //
        o, cc, m, o, //
        o, m, cc, o, //
        p, o, o, cc,
    ]
}

/// `exp(-i theta/2 Z⊗Z)`.
fn zz(theta: f64) -> Vec<C64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let o = c64(0.0, 0.0);
    let (e_m, e_p) = (c64(c, -s), c64(c, s));
    vec![
        e_m, o, o, o, //
        o, e_p, o, o, //
        o, o, e_p, o, //
        o, o, o, e_m,
    ]
}

/// Embed `spec` into the full `2^n x 2^n` space, identity on untouched qubits.
///
/// Qubit 0 is the most significant bit of the basis index; for two-qubit
/// gates the first listed qubit is the high bit of the local 4x4 block.
pub fn gate_matrix(spec: &GateSpec, n_qubits: usize) -> Result<UnitaryMatrix, QcoreError> {
    spec.validate(n_qubits)?;
    let local = spec.local_matrix()?;
    let dim = 1usize << n_qubits;
    let k = spec.kind.n_qubits();
    let ldim = 1usize << k;
    let mut data = vec![c64(0.0, 0.0); dim * dim];
    // bit position (from LSB) of each gate qubit in the basis index
    let shifts: Vec<usize> = spec.qubits.iter().map(|&q| n_qubits - 1 - q).collect();
    let gate_mask: usize = shifts.iter().map(|&s| 1usize << s).sum();
    for col in 0..dim {
        let rest = col & !gate_mask;
        let mut sub_col = 0usize;
        for (pos, &s) in shifts.iter().enumerate() {
            if (col >> s) & 1 == 1 {
                sub_col |= 1 << (k - 1 - pos);
            }
        }
        for sub_row in 0..ldim {
            let v = local[sub_row * ldim + sub_col];
            if v == c64(0.0, 0.0) {
                continue;
            }
            let mut row = rest;
            for (pos, &s) in shifts.iter().enumerate() {
                if (sub_row >> (k - 1 - pos)) & 1 == 1 {
                    row |= 1 << s;
                }
            }
            data[row * dim + col] = v;
        }
    }
    Ok(UnitaryMatrix::from_raw(dim, data))
}
