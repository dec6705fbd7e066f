//! Experiment orchestration on top of the planning and simulation core.

pub mod analysis;
pub mod checks;
pub mod error;
pub mod experiment;
pub mod io;
pub mod report;

pub use analysis::{mean_by_eta, mean_cost_by_eta, optimal_eta, regress_alpha, select_optimal_eta, RegressionResult};
pub use error::HarnessError;
pub use experiment::{
    replication_seed, run_replication, run_replication_detailed, sweep_grid, ExperimentPlan, RunResult, SweepOutcome,
};
pub use report::{emit_report, Report};
