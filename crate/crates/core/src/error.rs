use thiserror::Error;

use etaplan_solver::SolverError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("parse error at `{path}`: {message}")]
    Parse { path: String, message: String },
    #[error("unknown structure kind {0:?}")]
    UnknownStructure(String),
    #[error("`{field}` = {value} is outside {allowed}")]
    Range { field: String, value: f64, allowed: String },
    #[error("`{field}`: {message}")]
    Invalid { field: String, message: String },
    #[error("malformed structure: {0}")]
    Structure(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlanError {
    #[error("forecast covers {got} months, the model needs {needed}")]
    MissingForecast { needed: usize, got: usize },
    #[error("planned utilization {0} is outside [0, 1]")]
    Eta(f64),
    #[error("model input: {0}")]
    Input(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("aggregate plan has no feasible solution ({0})")]
    NoSolution(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("planning at day {day}: {source}")]
    Plan { day: u32, source: PlanError },
    #[error("invariant violated at t = {time}: {message}")]
    Invariant { time: f64, message: String },
    #[error("trace output: {0}")]
    Trace(String),
}
