use thiserror::Error;

/// Harness-level failures, each mapped to a process exit code:
/// 0 ok, 2 config error, 3 io error, 4 numeric failure.
#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl HarnessError {
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) => 2,
            HarnessError::Io(_) => 3,
            HarnessError::Numeric(_) => 4,
        }
    }

    pub fn config(msg: impl std::fmt::Display) -> Self {
        HarnessError::Config(msg.to_string())
    }

    pub fn io(msg: impl std::fmt::Display) -> Self {
        HarnessError::Io(msg.to_string())
    }

    pub fn numeric(msg: impl std::fmt::Display) -> Self {
        HarnessError::Numeric(msg.to_string())
    }
}

impl From<std::io::Error> for HarnessError {
    fn from(e: std::io::Error) -> Self {
        HarnessError::Io(e.to_string())
    }
}

impl From<rf_train::TrainError> for HarnessError {
    fn from(e: rf_train::TrainError) -> Self {
        match e {
            rf_train::TrainError::Io(io) => HarnessError::Io(io.to_string()),
            other => HarnessError::Numeric(other.to_string()),
        }
    }
}

impl From<rf_replay::ReplayError> for HarnessError {
    fn from(e: rf_replay::ReplayError) -> Self {
        match e {
            rf_replay::ReplayError::Io(io) => HarnessError::Io(io.to_string()),
            other => HarnessError::Config(other.to_string()),
        }
    }
}

impl From<rf_env_qas::QasError> for HarnessError {
    fn from(e: rf_env_qas::QasError) -> Self {
        HarnessError::Numeric(e.to_string())
    }
}

impl From<rf_qcore::QcoreError> for HarnessError {
    fn from(e: rf_qcore::QcoreError) -> Self {
        HarnessError::Config(e.to_string())
    }
}

impl From<rf_agent::AgentError> for HarnessError {
    fn from(e: rf_agent::AgentError) -> Self {
        HarnessError::Numeric(e.to_string())
    }
}
