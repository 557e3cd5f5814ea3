use crate::{CircuitTensorState, EncodingKind};

/// Encoding-I action: `[a0, a1, a2, a3]` with `a0` the CNOT control
/// (`a0 = n`: none), target `(a0 + a1) mod n`, `a2` the rotation qubit
/// (`a2 = n`: none) and `a3` the axis (1 = X, 2 = Y, 3 = Z).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionI {
    pub a0: usize,
    pub a1: usize,
    pub a2: usize,
    pub a3: usize,
}

/// Encoding-II action: `(control, offset)` slots for RXX/RYY/RZZ (control = n:
/// none) plus a rotation slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ActionII {
    pub xx: [usize; 2],
    pub yy: [usize; 2],
    pub zz: [usize; 2],
    pub rot: usize,
    pub axis: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QasAction {
    I(ActionI),
    II(ActionII),
}

impl QasAction {
    /// The placements this action requests, as (two-qubit pair, rotation qubit).
    pub(crate) fn footprint(&self, n: usize) -> (Vec<(usize, usize)>, Option<usize>) {
        match self {
            QasAction::I(a) => {
                let two = (a.a0 < n).then(|| (a.a0, (a.a0 + a.a1) % n)).into_iter().collect();
                (two, (a.a2 < n).then_some(a.a2))
            }
            QasAction::II(a) => {
                let mut two = Vec::new();
                for [c, off] in [a.xx, a.yy, a.zz] {
                    if c < n {
                        two.push((c, (c + off) % n));
                    }
                }
                (two, (a.rot < n).then_some(a.rot))
            }
        }
    }

    pub fn is_legal(&self, state: &CircuitTensorState) -> bool {
        let n = state.n_qubits();
        let (two, rot) = self.footprint(n);
        // probe moments without committing
        let mut moments = state.moments().to_vec();
        for &(c, t) in &two {
            let l = moments[c].max(moments[t]);
            if l >= state.l_max() {
                return false;
            }
            moments[c] = l + 1;
            moments[t] = l + 1;
        }
        if let Some(q) = rot {
            if moments[q] >= state.l_max() {
                return false;
            }
        }
        true
    }
}

/// The flat discrete action set the agent indexes into.
///
/// Per time step the agent may place at most one two-qubit gate and one
/// rotation. The enumeration is the product of the two-qubit choices
/// (`none` or `(control, offset)`, per gate type for encoding II) and the
/// rotation choices (`none` or `(qubit, axis)`), including the double no-op:
/// encoding I has `(n(n-1) + 1)(3n + 1)` actions, encoding II
/// `(3n(n-1) + 1)(3n + 1)`.
pub fn enumerate_actions(n: usize, encoding: EncodingKind) -> Vec<QasAction> {
    let mut two_choices: Vec<Vec<[usize; 2]>> = Vec::new();
    match encoding {
        EncodingKind::I => {
            let mut slot = vec![[n, 1]];
            for c in 0..n {
                for off in 1..n {
                    slot.push([c, off]);
                }
            }
            two_choices.push(slot);
        }
        EncodingKind::II => {
            // one shared selector: none or exactly one of the three gate types
            let mut slot = vec![[n, 1]];
            for c in 0..n {
                for off in 1..n {
                    slot.push([c, off]);
                }
            }
            two_choices.push(slot);
        }
    }
    let mut rot_choices: Vec<(usize, usize)> = vec![(n, 1)];
    for q in 0..n {
        for axis in 1..=3 {
            rot_choices.push((q, axis));
        }
    }

    let mut out = Vec::new();
    match encoding {
        EncodingKind::I => {
            for &[a0, a1] in &two_choices[0] {
                for &(a2, a3) in &rot_choices {
                    out.push(QasAction::I(ActionI { a0, a1, a2, a3 }));
                }
            }
        }
        EncodingKind::II => {
            let sentinel = [n, 1];
            // gate-type slots: none, XX(c,off), YY(c,off), ZZ(c,off)
            let mut combos: Vec<[[usize; 2]; 3]> = vec![[sentinel, sentinel, sentinel]];
            for (k, _) in ["xx", "yy", "zz"].iter().enumerate() {
                for &pair in two_choices[0].iter().skip(1) {
                    let mut combo = [sentinel, sentinel, sentinel];
                    combo[k] = pair;
                    combos.push(combo);
                }
            }
            for combo in combos {
                for &(rot, axis) in &rot_choices {
                    out.push(QasAction::II(ActionII {
                        xx: combo[0],
                        yy: combo[1],
                        zz: combo[2],
                        rot,
                        axis,
                    }));
                }
            }
        }
    }
    out
}
