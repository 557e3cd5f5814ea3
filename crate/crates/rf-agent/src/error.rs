use thiserror::Error;

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("input dimension {got} does not match network input {expected}")]
    InputDimMismatch { got: usize, expected: usize },
    #[error("no legal action in mask")]
    NoLegalAction,
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("transition from episode {got} pushed into accumulator holding episode {held}")]
    CrossEpisode { held: u32, got: u32 },
    #[error("bad checkpoint file: {0}")]
    BadCheckpoint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
