//! Best-first branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::Arc;

use crate::error::SolverError;
use crate::problem::{MilpProblem, MilpSolution, MilpStatus, NodeRecord, SolverOptions};
use crate::simplex::{solve_tableau, Outcome, Tableau};

struct Pending {
    /// Relaxation objective of the parent, a valid lower bound for this node.
    bound: f64,
    depth: usize,
    id: usize,
    fix: (usize, f64),
    parent: Arc<Tableau>,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // BinaryHeap is a max-heap: the "greatest" node is the one with the
    // smallest bound, then the deepest, then the oldest.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(self.depth.cmp(&other.depth))
            .then(other.id.cmp(&self.id))
    }
}

struct Incumbent {
    objective: f64,
    values: Vec<f64>,
}

fn most_fractional(tab: &Tableau, binaries: &[usize], tol: f64) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    let mut best_dist = tol;
    for &b in binaries {
        let v = tab.value(b);
        let frac = v - v.floor();
        let dist = frac.min(1.0 - frac);
        if dist > best_dist {
            best_dist = dist;
            best = Some((b, v));
        }
    }
    best
}

fn gap_between(incumbent: f64, bound: f64) -> f64 {
    ((incumbent - bound) / incumbent.abs().max(1.0)).max(0.0)
}

/// Solves a binary MILP by LP-based branch-and-bound.
///
/// Nodes are explored best-bound first. Until the first incumbent exists the
/// search plunges depth-first, following the child closest to the current
/// fractional value. Branching picks the most fractional binary, lowest index
/// on ties.
pub fn solve_milp(problem: &MilpProblem, opts: &SolverOptions) -> Result<MilpSolution, SolverError> {
    branch_and_bound(problem, opts, None)
}

/// Like [`solve_milp`], seeded with a known assignment of the binaries (in
/// `problem.binaries` order). A feasible start becomes the first incumbent,
/// so the search prunes from the outset and skips plunging.
pub fn solve_milp_with_start(
    problem: &MilpProblem,
    opts: &SolverOptions,
    start: &[f64],
) -> Result<MilpSolution, SolverError> {
    if start.len() != problem.binaries.len() {
        return Err(SolverError::Malformed("start length differs from the binary count".into()));
    }
    branch_and_bound(problem, opts, Some(start))
}

fn branch_and_bound(problem: &MilpProblem, opts: &SolverOptions, start: Option<&[f64]>) -> Result<MilpSolution, SolverError> {
    problem.validate()?;
    opts.validate()?;
    let mut binaries = problem.binaries.clone();
    binaries.sort_unstable();
    binaries.dedup();

    let (root_outcome, root) = solve_tableau(&problem.lp, opts)?;
    let mut tree = Vec::new();
    let record = |tree: &mut Vec<NodeRecord>, parent_bound: f64, bound: Option<f64>, depth: usize| {
        if opts.record_tree {
            tree.push(NodeRecord { parent_bound, bound, depth });
        }
    };
    match root_outcome {
        Outcome::Optimal => record(&mut tree, f64::NEG_INFINITY, Some(root.objective()), 0),
        Outcome::Infeasible => {
            record(&mut tree, f64::NEG_INFINITY, None, 0);
            return Ok(MilpSolution {
                status: MilpStatus::Infeasible,
                values: Vec::new(),
                objective: f64::NAN,
                gap: 0.0,
                nodes: 1,
                tree,
            });
        }
        Outcome::Unbounded => {
            return Ok(MilpSolution {
                status: MilpStatus::Unbounded,
                values: Vec::new(),
                objective: f64::NAN,
                gap: f64::INFINITY,
                nodes: 1,
                tree,
            });
        }
    }

    let mut heap: BinaryHeap<Pending> = BinaryHeap::new();
    let mut plunge: Option<Pending> = None;
    let mut incumbent: Option<Incumbent> = None;
    if let Some(start) = start {
        let mut fixed = root.clone();
        let changes: Vec<(usize, f64, f64)> =
            problem.binaries.iter().zip(start).map(|(&b, &v)| (b, v.round(), v.round())).collect();
        if fixed.set_bounds_and_resolve(&changes, opts)? == Outcome::Optimal {
            let mut values = fixed.structural_values();
            for &b in &binaries {
                values[b] = values[b].round();
            }
            incumbent = Some(Incumbent { objective: fixed.objective(), values });
        }
    }
    let mut next_id = 0usize;
    let mut nodes = 1usize;
    let mut hit_limit = false;

    // The root is handled like any other node after its relaxation is known.
    let mut current: Option<(Tableau, f64, usize)> = Some((root, f64::NEG_INFINITY, 0));

    loop {
        if let Some((tab, _parent_bound, depth)) = current.take() {
            let obj = tab.objective();
            let pruned = incumbent
                .as_ref()
                .is_some_and(|inc| obj >= inc.objective - opts.gap_tol * inc.objective.abs().max(1.0));
            if !pruned {
                match most_fractional(&tab, &binaries, opts.integrality_tol) {
                    None => {
                        if let Some(cand) = polish_integral(&tab, &binaries, opts)? {
                            if incumbent.as_ref().is_none_or(|inc| cand.objective < inc.objective) {
                                incumbent = Some(cand);
                            }
                        }
                    }
                    Some((var, value)) => {
                        let parent = Arc::new(tab);
                        let mut child = |fix: f64| {
                            next_id += 1;
                            Pending { bound: obj, depth: depth + 1, id: next_id, fix: (var, fix), parent: parent.clone() }
                        };
                        let up = child(1.0);
                        let down = child(0.0);
                        if incumbent.is_none() {
                            let (first, second) = if value >= 0.5 { (up, down) } else { (down, up) };
                            plunge = Some(first);
                            heap.push(second);
                        } else {
                            heap.push(up);
                            heap.push(down);
                        }
                    }
                }
            }
        }

        if let Some(inc) = &incumbent {
            let best_open = heap.peek().map_or(f64::INFINITY, |n| n.bound);
            let best_open = plunge.as_ref().map_or(best_open, |n| n.bound.min(best_open));
            if gap_between(inc.objective, best_open) <= opts.gap_tol {
                heap.clear();
                plunge = None;
            }
        }

        let node = match plunge.take() {
            Some(n) => n,
            None => match heap.pop() {
                Some(n) => n,
                None => break,
            },
        };
        if let Some(inc) = &incumbent {
            if node.bound >= inc.objective - opts.gap_tol * inc.objective.abs().max(1.0) {
                continue;
            }
        }
        if nodes >= opts.max_nodes {
            hit_limit = true;
            heap.push(node);
            break;
        }
        nodes += 1;
        let mut tab = (*node.parent).clone();
        let (var, value) = node.fix;
        let outcome = tab.set_bounds_and_resolve(&[(var, value, value)], opts)?;
        match outcome {
            Outcome::Optimal => {
                record(&mut tree, node.bound, Some(tab.objective()), node.depth);
                current = Some((tab, node.bound, node.depth));
            }
            Outcome::Infeasible | Outcome::Unbounded => {
                record(&mut tree, node.bound, None, node.depth);
            }
        }
    }

    let best_open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    Ok(match incumbent {
        Some(inc) => {
            let gap = if hit_limit { gap_between(inc.objective, best_open.min(inc.objective)) } else { 0.0 };
            MilpSolution {
                status: if hit_limit { MilpStatus::NodeLimit } else { MilpStatus::Optimal },
                values: inc.values,
                objective: inc.objective,
                gap,
                nodes,
                tree,
            }
        }
        None => MilpSolution {
            status: if hit_limit { MilpStatus::NodeLimit } else { MilpStatus::Infeasible },
            values: Vec::new(),
            objective: f64::NAN,
            gap: f64::INFINITY,
            nodes,
            tree,
        },
    })
}

/// Fixes every binary at its rounded value and re-solves, so the incumbent is
/// exactly integral with continuous values consistent to the LP tolerance.
fn polish_integral(tab: &Tableau, binaries: &[usize], opts: &SolverOptions) -> Result<Option<Incumbent>, SolverError> {
    let mut fixed = tab.clone();
    let changes: Vec<(usize, f64, f64)> = binaries
        .iter()
        .map(|&b| {
            let v = tab.value(b).round().clamp(0.0, 1.0);
            (b, v, v)
        })
        .collect();
    match fixed.set_bounds_and_resolve(&changes, opts)? {
        Outcome::Optimal => {
            let mut values = fixed.structural_values();
            for &b in binaries {
                values[b] = values[b].round();
            }
            Ok(Some(Incumbent { objective: fixed.objective(), values }))
        }
        _ => Ok(None),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{LpProblem, Relation};

    /// One machine-month: required hours 320, pick the 10- or 15-shift plan.
    /// `w = 1` selects 15 shifts, capacity `eta * (320 + 160 w) + e >= 320`.
    fn shift_choice(eta: f64) -> MilpProblem {
        let (ci, ce) = (100.0, 200.0);
        let mut lp = LpProblem::new();
        let w = lp.add_var(160.0 * ci, 0.0, 1.0);
        let e = lp.add_var(ce, 0.0, f64::INFINITY);
        lp.objective_offset = 320.0 * ci;
        lp.add_row(vec![(w, -160.0 * eta), (e, -1.0)], Relation::Le, 320.0 * eta - 320.0);
        MilpProblem::new(lp, vec![w])
    }

    #[test]
    fn full_utilisation_takes_ten_shifts() {
        let s = solve_milp(&shift_choice(1.0), &SolverOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective - 32_000.0).abs() < 1e-6);
        assert_eq!(s.values[0], 0.0);
        assert!(s.values[1].abs() < 1e-9);
    }

    #[test]
    fn reduced_utilisation_buys_external_hours() {
        let s = solve_milp(&shift_choice(0.8), &SolverOptions::default()).unwrap();
        assert_eq!(s.status, MilpStatus::Optimal);
        assert!((s.objective - 44_800.0).abs() < 1e-6);
        assert_eq!(s.values[0], 0.0);
        assert!((s.values[1] - 64.0).abs() < 1e-9);
    }

    #[test]
    fn node_limit_reports_incumbent() {
        let opts = SolverOptions { max_nodes: 1, ..Default::default() };
        let s = solve_milp(&shift_choice(0.8), &opts).unwrap();
        // One node is the root relaxation, which is fractional here.
        assert!(matches!(s.status, MilpStatus::NodeLimit | MilpStatus::Optimal));
    }
}
