use crate::error::SolverError;
use crate::problem::{MilpProblem, SolverOptions};
use crate::simplex::{Outcome, Tableau};

/// The LP left after fixing every binary, re-solved incrementally as the
/// assignment changes. Meant for primal heuristics that probe many nearby
/// assignments.
#[derive(Clone, Debug)]
pub struct FixedBinaryLp {
    problem: MilpProblem,
    /// Last tableau that solved to optimality, with its assignment.
    base: Option<(Tableau, Vec<f64>)>,
    tab: Tableau,
    current: Vec<f64>,
    feasible: bool,
    opts: SolverOptions,
}

impl FixedBinaryLp {
    pub fn new(problem: &MilpProblem, assignment: &[f64], opts: &SolverOptions) -> Result<Self, SolverError> {
        problem.validate()?;
        opts.validate()?;
        let (tab, feasible) = Self::fresh(problem, assignment, opts)?;
        Ok(Self {
            problem: problem.clone(),
            base: feasible.then(|| (tab.clone(), assignment.to_vec())),
            tab,
            current: assignment.to_vec(),
            feasible,
            opts: opts.clone(),
        })
    }

    fn fresh(problem: &MilpProblem, assignment: &[f64], opts: &SolverOptions) -> Result<(Tableau, bool), SolverError> {
        if assignment.len() != problem.binaries.len() {
            return Err(SolverError::Malformed("assignment length differs from the binary count".into()));
        }
        let mut lp = problem.lp.clone();
        for (&b, &v) in problem.binaries.iter().zip(assignment) {
            lp.lower[b] = v;
            lp.upper[b] = v;
        }
        let mut tab = Tableau::new(&lp);
        let outcome = tab.solve_from_scratch(opts)?;
        Ok((tab, outcome == Outcome::Optimal))
    }

    /// Re-solves for a new assignment; `None` when it is infeasible.
    pub fn evaluate(&mut self, assignment: &[f64]) -> Result<Option<f64>, SolverError> {
        if assignment.len() != self.problem.binaries.len() {
            return Err(SolverError::Malformed("assignment length differs from the binary count".into()));
        }
        if !self.feasible {
            match &self.base {
                Some((tab, asg)) => {
                    self.tab = tab.clone();
                    self.current = asg.clone();
                    self.feasible = true;
                }
                None => {
                    let (tab, feasible) = Self::fresh(&self.problem, assignment, &self.opts)?;
                    self.tab = tab;
                    self.feasible = feasible;
                    self.current = assignment.to_vec();
                    if feasible {
                        self.base = Some((self.tab.clone(), assignment.to_vec()));
                    }
                    return Ok(self.objective());
                }
            }
        }
        let changes: Vec<(usize, f64, f64)> = self
            .problem
            .binaries
            .iter()
            .zip(assignment)
            .zip(&self.current)
            .filter(|((_, v), c)| *v != *c)
            .map(|((&b, &v), _)| (b, v, v))
            .collect();
        if !changes.is_empty() {
            let outcome = self.tab.set_bounds_and_resolve(&changes, &self.opts)?;
            self.feasible = outcome == Outcome::Optimal;
            self.current = assignment.to_vec();
        }
        if self.feasible && !changes.is_empty() {
            self.base = Some((self.tab.clone(), assignment.to_vec()));
        }
        Ok(self.objective())
    }

    pub fn objective(&self) -> Option<f64> {
        self.feasible.then(|| self.tab.objective())
    }

    /// Variable values of the last feasible evaluation.
    pub fn values(&self) -> Option<Vec<f64>> {
        let (tab, _) = self.base.as_ref()?;
        let mut v = tab.structural_values();
        for &b in &self.problem.binaries {
            v[b] = v[b].round();
        }
        Some(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{LpProblem, Relation};

    #[test]
    fn flips_match_fresh_solves() {
        let mut lp = LpProblem::new();
        let w1 = lp.add_var(160.0, 0.0, 1.0);
        let w2 = lp.add_var(100.0, 0.0, 1.0);
        let e = lp.add_var(3.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(w1, 100.0), (w2, 60.0), (e, 1.0)], Relation::Ge, 120.0);
        let p = MilpProblem::new(lp, vec![w1, w2]);
        let opts = SolverOptions::default();
        let mut f = FixedBinaryLp::new(&p, &[0.0, 0.0], &opts).unwrap();
        assert_eq!(f.objective(), Some(360.0));
        assert_eq!(f.evaluate(&[1.0, 0.0]).unwrap(), Some(220.0));
        assert_eq!(f.evaluate(&[1.0, 1.0]).unwrap(), Some(260.0));
        assert_eq!(f.evaluate(&[0.0, 1.0]).unwrap(), Some(280.0));
        assert_eq!(f.values().unwrap()[w2], 1.0);
    }

    #[test]
    fn recovers_after_an_infeasible_assignment() {
        let mut lp = LpProblem::new();
        let w = lp.add_var(1.0, 0.0, 1.0);
        let x = lp.add_var(1.0, 0.0, 2.0);
        lp.add_row(vec![(w, 2.0), (x, 1.0)], Relation::Ge, 3.0);
        let p = MilpProblem::new(lp, vec![w]);
        let opts = SolverOptions::default();
        let mut f = FixedBinaryLp::new(&p, &[1.0], &opts).unwrap();
        assert_eq!(f.objective(), Some(2.0));
        let mut g = FixedBinaryLp::new(&p, &[0.0], &opts).unwrap();
        assert_eq!(g.objective(), None);
        assert_eq!(g.evaluate(&[1.0]).unwrap(), Some(2.0));
        assert_eq!(f.evaluate(&[0.0]).unwrap(), None);
        assert_eq!(f.evaluate(&[1.0]).unwrap(), Some(2.0));
    }
}
