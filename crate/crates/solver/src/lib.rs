//! Small-scale linear and binary-integer programming.
//!
//! [`solve_lp`] is a dense bounded-variable primal/dual simplex. [`solve_milp`]
//! wraps it in best-first branch-and-bound with warm-started child nodes.
//! [`enumerate_exact`] is a brute-force reference for tiny instances.

mod bnb;
mod enumerate;
mod error;
mod fixed;
mod lpformat;
mod problem;
mod simplex;

pub use bnb::{solve_milp, solve_milp_with_start};
pub use enumerate::{enumerate_exact, enumerate_exact_with, MAX_ENUMERATED_BINARIES};
pub use error::SolverError;
pub use fixed::FixedBinaryLp;
pub use lpformat::write_lp;
pub use problem::{
    LpProblem, LpSolution, LpStatus, MilpProblem, MilpSolution, MilpStatus, NodeRecord, Relation, Row,
    SolverOptions,
};
pub use simplex::solve_lp;
