use std::fmt;

use crate::error::SolverError;

/// Sense of a linear constraint row.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    /// Sparse coefficients as `(variable, coefficient)`.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

/// A minimisation linear program over bounded variables.
///
/// Lower bounds must be finite; upper bounds may be `f64::INFINITY`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Constant added to the objective value of every solution.
    pub objective_offset: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<Row>,
    /// Optional variable names, used by the LP-format writer.
    pub names: Vec<String>,
}

impl LpProblem {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    /// Adds a variable and returns its index.
    pub fn add_var(&mut self, cost: f64, lower: f64, upper: f64) -> usize {
        let idx = self.objective.len();
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(format!("x{idx}"));
        idx
    }

    pub fn add_named_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> usize {
        let idx = self.add_var(cost, lower, upper);
        self.names[idx] = name.into();
        idx
    }

    pub fn add_row(&mut self, coeffs: Vec<(usize, f64)>, relation: Relation, rhs: f64) -> usize {
        self.rows.push(Row { coeffs, relation, rhs });
        self.rows.len() - 1
    }

    /// Objective value of `values`, including the offset.
    pub fn evaluate(&self, values: &[f64]) -> f64 {
        self.objective_offset
            + self
                .objective
                .iter()
                .zip(values)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    /// Largest bound or row violation of `values`.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let mut worst = 0.0_f64;
        for (j, &v) in values.iter().enumerate() {
            worst = worst.max(self.lower[j] - v).max(v - self.upper[j]);
        }
        for row in &self.rows {
            let lhs: f64 = row.coeffs.iter().map(|&(j, a)| a * values[j]).sum();
            let viol = match row.relation {
                Relation::Le => lhs - row.rhs,
                Relation::Ge => row.rhs - lhs,
                Relation::Eq => (lhs - row.rhs).abs(),
            };
            worst = worst.max(viol);
        }
        worst
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let n = self.objective.len();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(SolverError::Malformed(format!(
                "{n} objective coefficients but {} lower / {} upper bounds",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for j in 0..n {
            let (lo, hi) = (self.lower[j], self.upper[j]);
            if !lo.is_finite() {
                return Err(SolverError::Malformed(format!("variable {j} has a non-finite lower bound")));
            }
            if hi.is_nan() || lo > hi {
                return Err(SolverError::Malformed(format!("variable {j} has bounds [{lo}, {hi}]")));
            }
            if !self.objective[j].is_finite() {
                return Err(SolverError::Malformed(format!("variable {j} has a non-finite cost")));
            }
        }
        for (i, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(SolverError::Malformed(format!("row {i} has a non-finite right-hand side")));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(SolverError::Malformed(format!("row {i} references variable {j} of {n}")));
                }
                if !a.is_finite() {
                    return Err(SolverError::Malformed(format!("row {i} has a non-finite coefficient")));
                }
            }
        }
        Ok(())
    }
}

/// An [`LpProblem`] in which some variables are restricted to `{0, 1}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct MilpProblem {
    pub lp: LpProblem,
    pub binaries: Vec<usize>,
}

impl MilpProblem {
    pub fn new(lp: LpProblem, binaries: Vec<usize>) -> Self {
        Self { lp, binaries }
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.lp.validate()?;
        for &b in &self.binaries {
            if b >= self.lp.num_vars() {
                return Err(SolverError::Malformed(format!("binary index {b} out of range")));
            }
            if self.lp.lower[b] < 0.0 || self.lp.upper[b] > 1.0 {
                return Err(SolverError::Malformed(format!(
                    "binary variable {b} has bounds outside [0, 1]"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Absolute tolerance on bound and row violations.
    pub feasibility_tol: f64,
    /// Reduced-cost tolerance for optimality.
    pub optimality_tol: f64,
    /// Distance from 0/1 below which a binary counts as integral.
    pub integrality_tol: f64,
    /// Relative optimality gap at which branch-and-bound stops.
    pub gap_tol: f64,
    /// Simplex pivots per LP solve.
    pub max_iterations: usize,
    /// Branch-and-bound nodes per MILP solve.
    pub max_nodes: usize,
    /// Record parent/child relaxation bounds of every processed node.
    pub record_tree: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            feasibility_tol: 1e-7,
            optimality_tol: 1e-9,
            integrality_tol: 1e-6,
            gap_tol: 1e-9,
            max_iterations: 50_000,
            max_nodes: 100_000,
            record_tree: false,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<(), SolverError> {
        let tols = [
            ("feasibility_tol", self.feasibility_tol),
            ("optimality_tol", self.optimality_tol),
            ("integrality_tol", self.integrality_tol),
            ("gap_tol", self.gap_tol),
        ];
        for (name, v) in tols {
            if !(v > 0.0) {
                return Err(SolverError::Malformed(format!("{name} must be positive, got {v}")));
            }
        }
        if self.max_iterations == 0 || self.max_nodes == 0 {
            return Err(SolverError::Malformed("iteration and node limits must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Variable values; empty unless `status` is `Optimal`.
    pub values: Vec<f64>,
    /// Objective including the offset; `NaN` unless optimal.
    pub objective: f64,
    pub iterations: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    /// The node limit was hit; `values` hold the best incumbent, if any.
    NodeLimit,
}

/// Relaxation bounds of one processed branch-and-bound node.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NodeRecord {
    pub parent_bound: f64,
    /// `None` when the node relaxation was infeasible.
    pub bound: Option<f64>,
    pub depth: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MilpSolution {
    pub status: MilpStatus,
    pub values: Vec<f64>,
    pub objective: f64,
    /// Relative gap between incumbent and best remaining bound.
    pub gap: f64,
    pub nodes: usize,
    pub tree: Vec<NodeRecord>,
}

impl MilpSolution {
    pub fn has_solution(&self) -> bool {
        !self.values.is_empty()
    }
}
