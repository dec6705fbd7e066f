use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("simplex iteration limit of {0} reached")]
    IterationLimit(usize),
    #[error("exhaustive enumeration supports at most {max} binaries, got {got}")]
    TooManyBinaries { max: usize, got: usize },
}
