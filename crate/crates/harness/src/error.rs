use thiserror::Error;

use etaplan_core::{ConfigError, SimError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Validation(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{cell}: {source}")]
    Run { cell: String, source: SimError },
    #[error("{failed} of {total} cells failed, first: {first}")]
    Partial { failed: usize, total: usize, first: String },
    #[error("baseline scenario {0:?} not found in the results")]
    MissingBaseline(String),
    #[error("regression needs variance in alpha")]
    ZeroVariance,
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl HarnessError {
    /// Process exit code: 1 for bad input, 2 for failures while running.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Validation(_)
            | HarnessError::Config(_)
            | HarnessError::MissingBaseline(_)
            | HarnessError::ZeroVariance => 1,
            HarnessError::Run { .. } | HarnessError::Partial { .. } | HarnessError::Io(_) | HarnessError::Csv(_) => 2,
        }
    }
}
