use thiserror::Error;

#[derive(Debug, Error)]
pub enum QcoreError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimMismatch(usize, usize),
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitOutOfRange { index: usize, n_qubits: usize },
    #[error("gate {0} requires an angle")]
    MissingAngle(&'static str),
    #[error("gate {0} takes no angle")]
    UnexpectedAngle(&'static str),
    #[error("gate {kind} expects {expected} qubit(s), got {got}")]
    WrongQubitCount {
        kind: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("duplicate qubit index {0} in two-qubit gate")]
    DuplicateQubit(usize),
    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("Hamiltonian on {h} qubits applied to {state}-qubit state")]
    QubitCountMismatch { h: usize, state: usize },
    #[error("{0} qubits is too large for dense diagonalization (max 12)")]
    TooManyQubits(usize),
    #[error("Heisenberg chain needs at least 2 sites, got {0}")]
    ChainTooShort(usize),
    #[error("invalid Hamiltonian file: {0}")]
    BadHamiltonianFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
