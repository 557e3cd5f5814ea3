use thiserror::Error;

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("buffer is empty")]
    Empty,
    #[error("batch size {batch} exceeds buffer size {len}")]
    BatchTooLarge { batch: usize, len: usize },
    #[error("slot index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("priority input must be non-negative and finite, got {0}")]
    BadPriority(f64),
    #[error("unknown episode id {0}")]
    UnknownEpisode(u32),
    #[error("episode is empty")]
    EmptyEpisode,
    #[error("transition carries no goal; HER needs goal-conditioned episodes")]
    MissingGoal,
    #[error("bad magic bytes; not a replay buffer file")]
    BadMagic,
    #[error("unsupported format version {0}")]
    BadVersion(u32),
    #[error("unknown strategy tag {0}")]
    BadStrategyTag(u8),
    #[error("buffer was recorded for state dim {file}, environment expects {expected}")]
    StateDimMismatch { file: u32, expected: u32 },
    #[error("buffer was recorded for {file} actions, environment expects {expected}")]
    ActionCountMismatch { file: u32, expected: u32 },
    #[error("truncated stream")]
    Truncated,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
