use rf_qcore::{GateKind, GateSpec};

use crate::{ActionI, ActionII, QasError};

/// Which tensor layout the environment runs.
///
/// Both encodings use a `[l_max x (n+3) x n]` tensor: rows `0..n` form the
/// connectivity plane (row = target qubit, column = control qubit), rows
/// `n..n+3` are the X/Y/Z rotation planes. Encoding I stores binary marks for
/// a single two-qubit gate type (CNOT); encoding II shares the connectivity
/// plane between RXX/RYY/RZZ through the integer labels 1/2/3, keeping the
/// footprint independent of the two-qubit vocabulary size.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EncodingKind {
    I,
    II,
}

/// Gate tallies read off the tensor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub two_qubit: u32,
    pub rotations: u32,
}

impl GateCounts {
    pub fn total(&self) -> u32 {
        self.two_qubit + self.rotations
    }
}

/// The layered circuit tensor plus the moment vector that enforces causal
/// gate ordering, and the (possibly stale) cost scalar appended to
/// observations.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitTensorState {
    n: usize,
    l_max: usize,
    encoding: EncodingKind,
    /// `[(l * (n+3)) + r] * n + c`, labels 0..=3.
    cells: Vec<u8>,
    moments: Vec<usize>,
    pub cost: f64,
    pub last_eval_cost: f64,
    pub steps_since_eval: u32,
}

/// One committed placement: `(moment, row, column, label)`.
pub(crate) type Placement = (usize, usize, usize, u8);

impl CircuitTensorState {
    pub fn new(n: usize, l_max: usize, encoding: EncodingKind) -> Self {
        assert!(n >= 2, "architecture search needs at least 2 qubits");
        Self {
            n,
            l_max,
            encoding,
            cells: vec![0; l_max * (n + 3) * n],
            moments: vec![0; n],
            cost: 0.0,
            last_eval_cost: 0.0,
            steps_since_eval: 0,
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn l_max(&self) -> usize {
        self.l_max
    }

    pub fn encoding(&self) -> EncodingKind {
        self.encoding
    }

    pub fn moments(&self) -> &[usize] {
        &self.moments
    }

    #[inline]
    fn idx(&self, l: usize, r: usize, c: usize) -> usize {
        (l * (self.n + 3) + r) * self.n + c
    }

    pub fn get(&self, l: usize, r: usize, c: usize) -> u8 {
        self.cells[self.idx(l, r, c)]
    }

    pub fn clear(&mut self) {
        self.cells.fill(0);
        self.moments.fill(0);
        self.steps_since_eval = 0;
    }

    /// Flattened tensor with the current cost appended; the agent observation.
    pub fn observation(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.cells.iter().map(|&v| v as f64).collect();
        out.push(self.cost);
        out
    }

    pub fn observation_dim(n: usize, l_max: usize) -> usize {
        l_max * (n + 3) * n + 1
    }

    /// Next free moment for each qubit as implied by a raw observation
    /// (inverse of [`CircuitTensorState::observation`], cost slot ignored).
    pub fn moments_from_observation(n: usize, l_max: usize, obs: &[f64]) -> Vec<usize> {
        let rows = n + 3;
        let mut moments = vec![0usize; n];
        for l in 0..l_max {
            for r in 0..rows {
                for c in 0..n {
                    if obs[(l * rows + r) * n + c] != 0.0 {
                        if r < n {
                            // two-qubit placement: control c, target r
                            moments[c] = moments[c].max(l + 1);
                            moments[r] = moments[r].max(l + 1);
                        } else {
                            moments[c] = moments[c].max(l + 1);
                        }
                    }
                }
            }
        }
        moments
    }

    /// Earliest causal moment for a two-qubit gate on `(control, target)`.
    fn two_qubit_moment(&self, control: usize, target: usize) -> usize {
        self.moments[control].max(self.moments[target])
    }

    pub(crate) fn place_two_qubit(
        &mut self,
        label: u8,
        control: usize,
        target: usize,
    ) -> Result<Placement, QasError> {
        debug_assert!(label >= 1 && label <= 3);
        let l = self.two_qubit_moment(control, target);
        if l >= self.l_max {
            return Err(QasError::ExceedsDepth(self.l_max));
        }
        let idx = self.idx(l, target, control);
        self.cells[idx] = label;
        self.moments[control] = l + 1;
        self.moments[target] = l + 1;
        Ok((l, target, control, label))
    }

    pub(crate) fn place_rotation(&mut self, axis: usize, qubit: usize) -> Result<Placement, QasError> {
        debug_assert!((1..=3).contains(&axis));
        let l = self.moments[qubit];
        if l >= self.l_max {
            return Err(QasError::ExceedsDepth(self.l_max));
        }
        let row = self.n + axis - 1;
        let idx = self.idx(l, row, qubit);
        self.cells[idx] = 1;
        self.moments[qubit] = l + 1;
        Ok((l, row, qubit, 1))
    }

    /// Whether the given action fits below the depth budget (no mutation).
    pub fn action_fits(&self, cnot_like: Option<(usize, usize)>, rotation: Option<usize>) -> bool {
        let mut moments = self.moments.clone();
        if let Some((control, target)) = cnot_like {
            let l = moments[control].max(moments[target]);
            if l >= self.l_max {
                return false;
            }
            moments[control] = l + 1;
            moments[target] = l + 1;
        }
        if let Some(q) = rotation {
            if moments[q] >= self.l_max {
                return false;
            }
        }
        true
    }

    /// Binary encoding I: four-tuple `[a0, a1, a2, a3]`. `a0` is the CNOT
    /// control (`a0 = n` places none) with target `(a0 + a1) mod n`; `a2` is
    /// the rotation qubit (`a2 = n` places none) with axis `a3` in 1..=3.
    /// The CNOT lands first, then the rotation.
    pub fn encode_action_i(&mut self, action: &ActionI) -> Result<Vec<Placement>, QasError> {
        debug_assert_eq!(self.encoding, EncodingKind::I);
        let n = self.n;
        if action.a0 > n || action.a2 > n {
            return Err(QasError::BadAction("qubit index"));
        }
        if action.a0 < n && !(1..n).contains(&action.a1) {
            return Err(QasError::BadAction("target offset"));
        }
        if action.a2 < n && !(1..=3).contains(&action.a3) {
            return Err(QasError::BadAction("rotation axis"));
        }
        let cnot = (action.a0 < n).then(|| (action.a0, (action.a0 + action.a1) % n));
        let rot = (action.a2 < n).then_some(action.a2);
        if !self.action_fits(cnot, rot) {
            return Err(QasError::ExceedsDepth(self.l_max));
        }
        let mut placements = Vec::with_capacity(2);
        if let Some((control, target)) = cnot {
            placements.push(self.place_two_qubit(1, control, target)?);
        }
        if let Some(q) = rot {
            placements.push(self.place_rotation(action.a3, q)?);
        }
        Ok(placements)
    }

    /// Integer-labeled encoding II: eight-tuple
    /// `[a0^xx, a1^xx, a0^yy, a1^yy, a0^zz, a1^zz, a_rot, a_axis]` placing
    /// labels 1/2/3 for RXX/RYY/RZZ in the shared connectivity plane, then
    /// the binary rotation mark.
    pub fn encode_action_ii(&mut self, action: &ActionII) -> Result<Vec<Placement>, QasError> {
        debug_assert_eq!(self.encoding, EncodingKind::II);
        let n = self.n;
        let pairs = [(action.xx, 1u8), (action.yy, 2u8), (action.zz, 3u8)];
        for ([a0, a1], _) in &pairs {
            if *a0 > n {
                return Err(QasError::BadAction("control index"));
            }
            if *a0 < n && !(1..n).contains(a1) {
                return Err(QasError::BadAction("target offset"));
            }
        }
        if action.rot > n {
            return Err(QasError::BadAction("rotation qubit"));
        }
        if action.rot < n && !(1..=3).contains(&action.axis) {
            return Err(QasError::BadAction("rotation axis"));
        }
        // feasibility probe over a moment copy
        {
            let mut moments = self.moments.clone();
            for ([a0, a1], _) in &pairs {
                if *a0 < n {
                    let t = (a0 + a1) % n;
                    let l = moments[*a0].max(moments[t]);
                    if l >= self.l_max {
                        return Err(QasError::ExceedsDepth(self.l_max));
                    }
                    moments[*a0] = l + 1;
                    moments[t] = l + 1;
                }
            }
            if action.rot < n && moments[action.rot] >= self.l_max {
                return Err(QasError::ExceedsDepth(self.l_max));
            }
        }
        let mut placements = Vec::with_capacity(4);
        for ([a0, a1], label) in pairs {
            if a0 < n {
                placements.push(self.place_two_qubit(label, a0, (a0 + a1) % n)?);
            }
        }
        if action.rot < n {
            placements.push(self.place_rotation(action.axis, action.rot)?);
        }
        Ok(placements)
    }

    pub fn counts(&self) -> GateCounts {
        let mut counts = GateCounts::default();
        for l in 0..self.l_max {
            for r in 0..self.n + 3 {
                for c in 0..self.n {
                    if self.get(l, r, c) != 0 {
                        if r < self.n {
                            counts.two_qubit += 1;
                        } else {
                            counts.rotations += 1;
                        }
                    }
                }
            }
        }
        counts
    }

    /// Number of variational parameters of the encoded circuit.
    pub fn parameter_count(&self) -> usize {
        let counts = self.counts();
        match self.encoding {
            EncodingKind::I => counts.rotations as usize,
            EncodingKind::II => counts.total() as usize,
        }
    }

    /// Deterministic tensor-to-circuit mapping: gates ordered by moment, then
    /// connectivity row scan, then rotation planes; `thetas` bind to the
    /// parameterized gates in that order (CNOT takes none).
    pub fn build_circuit(&self, thetas: &[f64]) -> Result<Vec<GateSpec>, QasError> {
        let expected = self.parameter_count();
        if thetas.len() != expected {
            return Err(QasError::ThetaCountMismatch { expected, got: thetas.len() });
        }
        let mut gates = Vec::new();
        let mut next_theta = 0usize;
        for l in 0..self.l_max {
            for target in 0..self.n {
                for control in 0..self.n {
                    let label = self.get(l, target, control);
                    if label == 0 {
                        continue;
                    }
                    let gate = match (self.encoding, label) {
                        (EncodingKind::I, 1) => GateSpec::two(GateKind::Cnot, control, target, None),
                        (EncodingKind::II, 1) => {
                            let g = GateSpec::two(GateKind::Rxx, control, target, Some(thetas[next_theta]));
                            next_theta += 1;
                            g
                        }
                        (EncodingKind::II, 2) => {
                            let g = GateSpec::two(GateKind::Ryy, control, target, Some(thetas[next_theta]));
                            next_theta += 1;
                            g
                        }
                        (EncodingKind::II, 3) => {
                            let g = GateSpec::two(GateKind::Rzz, control, target, Some(thetas[next_theta]));
                            next_theta += 1;
                            g
                        }
                        _ => return Err(QasError::BadAction("tensor label")),
                    };
                    gates.push(gate);
                }
            }
            for axis in 1..=3usize {
                let row = self.n + axis - 1;
                for q in 0..self.n {
                    if self.get(l, row, q) != 0 {
                        let kind = [GateKind::Rx, GateKind::Ry, GateKind::Rz][axis - 1];
                        gates.push(GateSpec::one(kind, q, Some(thetas[next_theta])));
                        next_theta += 1;
                    }
                }
            }
        }
        Ok(gates)
    }

    /// Stable identity keys of every placement in circuit order; used to carry
    /// optimized angles across evaluations as the tensor grows.
    pub fn placement_keys(&self) -> Vec<(usize, usize, usize)> {
        let mut keys = Vec::new();
        for l in 0..self.l_max {
            for target in 0..self.n {
                for control in 0..self.n {
                    let label = self.get(l, target, control);
                    if label == 0 {
                        continue;
                    }
                    let parameterized = !(self.encoding == EncodingKind::I && label == 1);
                    if parameterized {
                        keys.push((l, target, control));
                    }
                }
            }
            for row in self.n..self.n + 3 {
                for q in 0..self.n {
                    if self.get(l, row, q) != 0 {
                        keys.push((l, row, q));
                    }
                }
            }
        }
        keys
    }
}
