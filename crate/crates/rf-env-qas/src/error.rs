use thiserror::Error;

#[derive(Debug, Error)]
pub enum QasError {
    #[error("placement would exceed the {0}-moment depth budget")]
    ExceedsDepth(usize),
    #[error("action component {0} out of range")]
    BadAction(&'static str),
    #[error("circuit takes {expected} parameters, got {got}")]
    ThetaCountMismatch { expected: usize, got: usize },
    #[error("non-finite cost during variational search")]
    NonFiniteCost,
    #[error("step on a finished episode")]
    FinishedEpisode,
    #[error(transparent)]
    Qcore(#[from] rf_qcore::QcoreError),
}
