use crate::error::SolverError;
use crate::problem::{LpStatus, MilpProblem, MilpSolution, MilpStatus, SolverOptions};
use crate::simplex::solve_lp;

pub const MAX_ENUMERATED_BINARIES: usize = 20;

/// Exhaustive reference solver: fixes every binary assignment and solves the
/// remaining LP, keeping the best. Exists to cross-check [`crate::solve_milp`].
pub fn enumerate_exact(problem: &MilpProblem) -> Result<MilpSolution, SolverError> {
    enumerate_exact_with(problem, &SolverOptions::default())
}

pub fn enumerate_exact_with(problem: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution, SolverError> {
    problem.validate()?;
    let mut binaries = problem.binaries.clone();
    binaries.sort_unstable();
    binaries.dedup();
    if binaries.len() > MAX_ENUMERATED_BINARIES {
        return Err(SolverError::TooManyBinaries { max: MAX_ENUMERATED_BINARIES, got: binaries.len() });
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut unbounded = false;
    let mut lp = problem.lp.clone();
    let total = 1u64 << binaries.len();
    for mask in 0..total {
        let mut skip = false;
        for (k, &b) in binaries.iter().enumerate() {
            let v = ((mask >> k) & 1) as f64;
            if v < problem.lp.lower[b] || v > problem.lp.upper[b] {
                skip = true;
                break;
            }
            lp.lower[b] = v;
            lp.upper[b] = v;
        }
        if skip {
            continue;
        }
        let sol = solve_lp(&lp, opts)?;
        match sol.status {
            LpStatus::Optimal => {
                if best.as_ref().is_none_or(|(obj, _)| sol.objective < *obj) {
                    best = Some((sol.objective, sol.values));
                }
            }
            LpStatus::Unbounded => unbounded = true,
            LpStatus::Infeasible => {}
        }
    }

    let nodes = total as usize;
    Ok(if unbounded {
        MilpSolution { status: MilpStatus::Unbounded, values: Vec::new(), objective: f64::NAN, gap: f64::INFINITY, nodes, tree: Vec::new() }
    } else if let Some((objective, values)) = best {
        MilpSolution { status: MilpStatus::Optimal, values, objective, gap: 0.0, nodes, tree: Vec::new() }
    } else {
        MilpSolution { status: MilpStatus::Infeasible, values: Vec::new(), objective: f64::NAN, gap: 0.0, nodes, tree: Vec::new() }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{LpProblem, Relation};

    #[test]
    fn infeasible_for_every_assignment() {
        let mut lp = LpProblem::new();
        let a = lp.add_var(1.0, 0.0, 1.0);
        let b = lp.add_var(1.0, 0.0, 1.0);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Relation::Ge, 3.0);
        let s = enumerate_exact(&MilpProblem::new(lp, vec![a, b])).unwrap();
        assert_eq!(s.status, MilpStatus::Infeasible);
    }

    #[test]
    fn rejects_large_instances() {
        let mut lp = LpProblem::new();
        let bins: Vec<usize> = (0..21).map(|_| lp.add_var(1.0, 0.0, 1.0)).collect();
        let err = enumerate_exact(&MilpProblem::new(lp, bins)).unwrap_err();
        assert_eq!(err, SolverError::TooManyBinaries { max: 20, got: 21 });
    }
}
