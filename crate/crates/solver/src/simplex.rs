//! Dense bounded-variable simplex.
//!
//! The tableau stores `B⁻¹A` for the structural, slack and (during phase one)
//! artificial columns. Nonbasic variables sit at one of their bounds; basic
//! values are tracked explicitly so no separate right-hand side is needed.
//! Primal simplex solves from scratch, dual simplex re-optimises after bound
//! changes, which is how branch-and-bound warm-starts its children.

use std::sync::Arc;

use crate::error::SolverError;
use crate::problem::{LpProblem, LpSolution, LpStatus, Relation, SolverOptions};

const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_STALL: usize = 50;
/// Pivots between refactorisations of the tableau.
const REFACTOR_EVERY: usize = 400;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum VarState {
    Basic,
    Lower,
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Outcome {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug)]
pub(crate) struct Tableau {
    m: usize,
    width: usize,
    n_struct: usize,
    t: Vec<f64>,
    x: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    cost: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    state: Vec<VarState>,
    artificial: Vec<bool>,
    offset: f64,
    /// Original constraint matrix (row-major, same column layout) and rhs.
    orig: Arc<Vec<f64>>,
    rhs: Arc<Vec<f64>>,
    rhs_scale: f64,
    since_refactor: usize,
    pub(crate) iterations: usize,
}

impl Tableau {
    /// Builds the phase-one tableau with a slack/artificial starting basis.
    pub(crate) fn new(lp: &LpProblem) -> Self {
        let n = lp.num_vars();
        let m = lp.num_rows();

        let mut x: Vec<f64> = lp.lower.clone();
        let mut slack_sign = vec![1.0; m];
        let mut slack_upper = vec![f64::INFINITY; m];
        let mut slack_value = vec![0.0; m];
        let mut slack_state = vec![VarState::Basic; m];
        // (row, sign, value) for rows needing an artificial
        let mut arts: Vec<(usize, f64, f64)> = Vec::new();

        for (i, row) in lp.rows.iter().enumerate() {
            match row.relation {
                Relation::Le => {}
                Relation::Ge => slack_sign[i] = -1.0,
                Relation::Eq => slack_upper[i] = 0.0,
            }
            let activity: f64 = row.coeffs.iter().map(|&(j, a)| a * x[j]).sum();
            let residual = row.rhs - activity;
            let s = slack_sign[i] * residual;
            if s >= 0.0 && s <= slack_upper[i] {
                slack_value[i] = s;
            } else {
                let clamped = s.clamp(0.0, slack_upper[i]);
                slack_value[i] = clamped;
                slack_state[i] = if clamped == 0.0 { VarState::Lower } else { VarState::Upper };
                let rest = residual - slack_sign[i] * clamped;
                arts.push((i, rest.signum(), rest.abs()));
            }
        }

        let width = n + m + arts.len();
        let mut orig = vec![0.0; m * width];
        let mut rhs = vec![0.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            for &(j, a) in &row.coeffs {
                orig[i * width + j] += a;
            }
            orig[i * width + n + i] = slack_sign[i];
            rhs[i] = row.rhs;
        }
        let mut basis: Vec<usize> = (0..m).map(|i| n + i).collect();
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        let mut state = vec![VarState::Lower; n];
        let mut artificial = vec![false; n + m];
        lower.extend(std::iter::repeat_n(0.0, m));
        upper.extend(slack_upper.iter().copied());
        x.extend(slack_value.iter().copied());
        state.extend(slack_state.iter().copied());
        for (k, &(i, sign, value)) in arts.iter().enumerate() {
            let col = n + m + k;
            orig[i * width + col] = sign;
            basis[i] = col;
            lower.push(0.0);
            upper.push(f64::INFINITY);
            x.push(value);
            state.push(VarState::Basic);
            artificial.push(true);
        }
        let mut cost = lp.objective.clone();
        cost.resize(width, 0.0);

        // The starting basis is diagonal with ±1 entries, so B⁻¹A is a row sign flip.
        let mut t = orig.clone();
        for i in 0..m {
            let diag = orig[i * width + basis[i]];
            if diag < 0.0 {
                for v in &mut t[i * width..(i + 1) * width] {
                    *v = -*v;
                }
            }
        }
        let rhs_scale = 1.0 + rhs.iter().fold(0.0_f64, |a, b| a.max(b.abs()));

        Self {
            m,
            width,
            n_struct: n,
            t,
            x,
            lower,
            upper,
            cost,
            d: vec![0.0; width],
            basis,
            state,
            artificial,
            offset: lp.objective_offset,
            orig: Arc::new(orig),
            rhs: Arc::new(rhs),
            rhs_scale,
            since_refactor: 0,
            iterations: 0,
        }
    }

    pub(crate) fn value(&self, j: usize) -> f64 {
        self.x[j]
    }

    pub(crate) fn structural_values(&self) -> Vec<f64> {
        self.x[..self.n_struct].to_vec()
    }

    pub(crate) fn objective(&self) -> f64 {
        self.offset
            + self.cost[..self.n_struct]
                .iter()
                .zip(&self.x)
                .map(|(c, v)| c * v)
                .sum::<f64>()
    }

    fn has_artificials(&self) -> bool {
        self.artificial.iter().any(|&a| a)
    }

    fn recompute_reduced_costs(&mut self, cost: &[f64]) {
        let w = self.width;
        self.d.copy_from_slice(cost);
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * w..(i + 1) * w];
                for (dj, &tij) in self.d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    /// Pivots column `q` into the basis at row `r`. Values must already be updated.
    fn pivot(&mut self, r: usize, q: usize) {
        let w = self.width;
        let p = self.t[r * w + q];
        let inv = 1.0 / p;
        let mut nz: Vec<usize> = Vec::with_capacity(w);
        {
            let row_r = &mut self.t[r * w..(r + 1) * w];
            for (j, v) in row_r.iter_mut().enumerate() {
                if *v != 0.0 {
                    *v *= inv;
                    if v.abs() < 1e-14 {
                        *v = 0.0;
                    } else {
                        nz.push(j);
                    }
                }
            }
            row_r[q] = 1.0;
        }
        let (head, rest) = self.t.split_at_mut(r * w);
        let (row_r, tail) = rest.split_at_mut(w);
        for row in head.chunks_exact_mut(w).chain(tail.chunks_exact_mut(w)) {
            let f = row[q];
            if f != 0.0 {
                for &j in &nz {
                    row[j] -= f * row_r[j];
                }
                row[q] = 0.0;
            }
        }
        let dq = self.d[q];
        if dq != 0.0 {
            for &j in &nz {
                self.d[j] -= dq * row_r[j];
            }
            self.d[q] = 0.0;
        }
        let leaving = self.basis[r];
        self.basis[r] = q;
        self.state[q] = VarState::Basic;
        debug_assert!(self.state[leaving] != VarState::Basic);
        self.since_refactor += 1;
    }

    fn move_nonbasic(&mut self, q: usize, delta: f64) {
        if delta == 0.0 {
            return;
        }
        let w = self.width;
        self.x[q] += delta;
        for i in 0..self.m {
            let a = self.t[i * w + q];
            if a != 0.0 {
                self.x[self.basis[i]] -= delta * a;
            }
        }
    }

    /// Primal simplex on the current reduced costs `self.d`.
    fn primal(&mut self, opts: &SolverOptions, phase_one: bool) -> Result<Outcome, SolverError> {
        let w = self.width;
        let feas = opts.feasibility_tol;
        let mut degenerate_run = 0usize;
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(SolverError::IterationLimit(opts.max_iterations));
            }
            let bland = degenerate_run >= DEGENERATE_STALL;
            // Pricing.
            let mut entering: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..w {
                let dir = match self.state[j] {
                    VarState::Basic => continue,
                    _ if self.lower[j] == self.upper[j] => continue,
                    VarState::Lower if self.d[j] < -opts.optimality_tol => 1.0,
                    VarState::Upper if self.d[j] > opts.optimality_tol => -1.0,
                    _ => continue,
                };
                if !phase_one && self.artificial[j] {
                    continue;
                }
                if bland {
                    entering = Some((j, dir));
                    break;
                }
                let score = self.d[j].abs();
                if score > best {
                    best = score;
                    entering = Some((j, dir));
                }
            }
            let Some((q, dir)) = entering else {
                return Ok(Outcome::Optimal);
            };

            // Harris two-pass ratio test.
            let mut relaxed = f64::INFINITY;
            for i in 0..self.m {
                let alpha = dir * self.t[i * w + q];
                if alpha.abs() <= PIVOT_TOL {
                    continue;
                }
                let b = self.basis[i];
                let lim = if alpha > 0.0 {
                    (self.x[b] - self.lower[b] + feas) / alpha
                } else if self.upper[b].is_finite() {
                    (self.upper[b] - self.x[b] + feas) / -alpha
                } else {
                    continue;
                };
                relaxed = relaxed.min(lim);
            }
            let span = self.upper[q] - self.lower[q];
            let mut leave: Option<(usize, f64)> = None;
            let mut leave_alpha = 0.0;
            if relaxed.is_finite() {
                for i in 0..self.m {
                    let alpha = dir * self.t[i * w + q];
                    if alpha.abs() <= PIVOT_TOL {
                        continue;
                    }
                    let b = self.basis[i];
                    let lim = if alpha > 0.0 {
                        (self.x[b] - self.lower[b]) / alpha
                    } else if self.upper[b].is_finite() {
                        (self.upper[b] - self.x[b]) / -alpha
                    } else {
                        continue;
                    };
                    if lim > relaxed {
                        continue;
                    }
                    let better = match leave {
                        None => true,
                        Some((li, _)) if bland => b < self.basis[li],
                        Some(_) => alpha.abs() > leave_alpha,
                    };
                    if better {
                        leave = Some((i, lim.max(0.0)));
                        leave_alpha = alpha.abs();
                    }
                }
            }
            self.iterations += 1;

            let step = leave.map_or(f64::INFINITY, |(_, s)| s);
            if span <= step {
                if !span.is_finite() {
                    return Ok(Outcome::Unbounded);
                }
                // Bound flip.
                self.move_nonbasic(q, dir * span);
                self.x[q] = if dir > 0.0 { self.upper[q] } else { self.lower[q] };
                self.state[q] = if dir > 0.0 { VarState::Upper } else { VarState::Lower };
                degenerate_run = 0;
                continue;
            }
            let Some((r, step)) = leave else {
                return Ok(Outcome::Unbounded);
            };
            let alpha = dir * self.t[r * w + q];
            self.move_nonbasic(q, dir * step);
            let b = self.basis[r];
            if alpha > 0.0 {
                self.x[b] = self.lower[b];
                self.state[b] = VarState::Lower;
            } else {
                self.x[b] = self.upper[b];
                self.state[b] = VarState::Upper;
            }
            self.pivot(r, q);
            degenerate_run = if step <= 1e-12 { degenerate_run + 1 } else { 0 };
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                let c = if phase_one { self.phase_one_costs() } else { self.cost.clone() };
                self.recompute_reduced_costs(&c);
            }
        }
    }

    /// Dual simplex from a dual-feasible basis.
    fn dual(&mut self, opts: &SolverOptions) -> Result<Outcome, SolverError> {
        let w = self.width;
        let feas = opts.feasibility_tol;
        loop {
            if self.iterations >= opts.max_iterations {
                return Err(SolverError::IterationLimit(opts.max_iterations));
            }
            // Leaving row: largest bound violation.
            let mut leave: Option<(usize, f64, bool)> = None;
            let mut worst = feas;
            for i in 0..self.m {
                let b = self.basis[i];
                let below = self.lower[b] - self.x[b];
                let above = self.x[b] - self.upper[b];
                if below > worst {
                    worst = below;
                    leave = Some((i, self.lower[b], true));
                } else if above > worst {
                    worst = above;
                    leave = Some((i, self.upper[b], false));
                }
            }
            let Some((r, target, increase)) = leave else {
                return Ok(Outcome::Optimal);
            };

            let row = &self.t[r * w..(r + 1) * w];
            let eligible = |j: usize| -> Option<f64> {
                let a = row[j];
                if a.abs() <= PIVOT_TOL || self.lower[j] == self.upper[j] || self.artificial[j] {
                    return None;
                }
                let ok = match (self.state[j], increase) {
                    (VarState::Basic, _) => false,
                    (VarState::Lower, true) => a < 0.0,
                    (VarState::Upper, true) => a > 0.0,
                    (VarState::Lower, false) => a > 0.0,
                    (VarState::Upper, false) => a < 0.0,
                };
                ok.then_some(a)
            };
            let mut relaxed = f64::INFINITY;
            for j in 0..w {
                if let Some(a) = eligible(j) {
                    relaxed = relaxed.min((self.d[j].abs() + opts.optimality_tol) / a.abs());
                }
            }
            if !relaxed.is_finite() {
                return Ok(Outcome::Infeasible);
            }
            let mut enter: Option<usize> = None;
            let mut enter_alpha = 0.0;
            for j in 0..w {
                if let Some(a) = eligible(j) {
                    if self.d[j].abs() / a.abs() <= relaxed && a.abs() > enter_alpha {
                        enter = Some(j);
                        enter_alpha = a.abs();
                    }
                }
            }
            let q = enter.expect("relaxed ratio implies a candidate");
            self.iterations += 1;

            let alpha = self.t[r * w + q];
            let b = self.basis[r];
            let theta = (self.x[b] - target) / alpha;
            self.move_nonbasic(q, theta);
            self.x[b] = target;
            self.state[b] = if increase { VarState::Lower } else { VarState::Upper };
            self.pivot(r, q);
            if self.since_refactor >= REFACTOR_EVERY {
                self.refactor()?;
                let c = self.cost.clone();
                self.recompute_reduced_costs(&c);
            }
        }
    }

    fn phase_one_costs(&self) -> Vec<f64> {
        self.artificial.iter().map(|&a| if a { 1.0 } else { 0.0 }).collect()
    }

    /// Solves the LP from the starting basis built by [`Tableau::new`].
    pub(crate) fn solve_from_scratch(&mut self, opts: &SolverOptions) -> Result<Outcome, SolverError> {
        if self.has_artificials() {
            let c1 = self.phase_one_costs();
            self.recompute_reduced_costs(&c1);
            self.primal(opts, true)?;
            let infeasibility: f64 = (0..self.width).filter(|&j| self.artificial[j]).map(|j| self.x[j]).sum();
            if infeasibility > opts.feasibility_tol * self.rhs_scale {
                return Ok(Outcome::Infeasible);
            }
            self.remove_artificials();
        }
        let cost = self.cost.clone();
        self.recompute_reduced_costs(&cost);
        let out = self.primal(opts, false)?;
        if out == Outcome::Optimal {
            return self.polish(opts);
        }
        Ok(out)
    }

    /// Drives zero-valued artificials out of the basis and drops their columns.
    fn remove_artificials(&mut self) {
        let w = self.width;
        for r in 0..self.m {
            let b = self.basis[r];
            if !self.artificial[b] {
                continue;
            }
            let mut best: Option<usize> = None;
            let mut best_abs = 1e-7;
            for j in 0..w {
                if self.artificial[j] || self.state[j] == VarState::Basic {
                    continue;
                }
                let a = self.t[r * w + j].abs();
                if a > best_abs {
                    best_abs = a;
                    best = Some(j);
                }
            }
            if let Some(q) = best {
                // Degenerate pivot: the artificial is at zero, so no values move.
                self.x[b] = 0.0;
                self.state[b] = VarState::Lower;
                self.pivot(r, q);
            }
        }
        for j in 0..w {
            if self.artificial[j] {
                self.x[j] = 0.0;
                self.upper[j] = 0.0;
            }
        }
        let keep: Vec<bool> = (0..w)
            .map(|j| !self.artificial[j] || self.state[j] == VarState::Basic)
            .collect();
        if keep.iter().all(|&k| k) {
            return;
        }
        let cols: Vec<usize> = (0..w).filter(|&j| keep[j]).collect();
        let mut remap = vec![usize::MAX; w];
        for (new, &old) in cols.iter().enumerate() {
            remap[old] = new;
        }
        let nw = cols.len();
        let mut t = vec![0.0; self.m * nw];
        let mut orig = vec![0.0; self.m * nw];
        for i in 0..self.m {
            for (new, &old) in cols.iter().enumerate() {
                t[i * nw + new] = self.t[i * w + old];
                orig[i * nw + new] = self.orig[i * w + old];
            }
        }
        let pick = |v: &Vec<f64>| cols.iter().map(|&j| v[j]).collect::<Vec<f64>>();
        self.x = pick(&self.x);
        self.lower = pick(&self.lower);
        self.upper = pick(&self.upper);
        self.cost = pick(&self.cost);
        self.d = pick(&self.d);
        self.state = cols.iter().map(|&j| self.state[j]).collect();
        self.artificial = cols.iter().map(|&j| self.artificial[j]).collect();
        for b in &mut self.basis {
            *b = remap[*b];
        }
        self.t = t;
        self.orig = Arc::new(orig);
        self.width = nw;
    }

    /// Rebuilds `B⁻¹A` and basic values from the original matrix.
    fn refactor(&mut self) -> Result<(), SolverError> {
        let w = self.width;
        let m = self.m;
        let cols = w + 1;
        let mut a = vec![0.0; m * cols];
        for i in 0..m {
            a[i * cols..i * cols + w].copy_from_slice(&self.orig[i * w..(i + 1) * w]);
            a[i * cols + w] = self.rhs[i];
        }
        // Gauss-Jordan over the basic columns with partial pivoting.
        let mut row_of = vec![usize::MAX; m];
        let mut used = vec![false; m];
        for (k, &col) in self.basis.iter().enumerate() {
            let mut piv = None;
            let mut best = 1e-11;
            for i in 0..m {
                if !used[i] && a[i * cols + col].abs() > best {
                    best = a[i * cols + col].abs();
                    piv = Some(i);
                }
            }
            let Some(p) = piv else {
                return Err(SolverError::Malformed("singular basis during refactorisation".into()));
            };
            used[p] = true;
            row_of[k] = p;
            let inv = 1.0 / a[p * cols + col];
            for v in &mut a[p * cols..(p + 1) * cols] {
                *v *= inv;
            }
            let pivot_row: Vec<f64> = a[p * cols..(p + 1) * cols].to_vec();
            let nz: Vec<usize> = (0..cols).filter(|&j| pivot_row[j] != 0.0).collect();
            for i in 0..m {
                if i == p {
                    continue;
                }
                let f = a[i * cols + col];
                if f != 0.0 {
                    for &j in &nz {
                        a[i * cols + j] -= f * pivot_row[j];
                    }
                    a[i * cols + col] = 0.0;
                }
            }
        }
        let mut t = vec![0.0; m * w];
        let mut beta = vec![0.0; m];
        for k in 0..m {
            let p = row_of[k];
            t[k * w..(k + 1) * w].copy_from_slice(&a[p * cols..p * cols + w]);
            beta[k] = a[p * cols + w];
        }
        self.t = t;
        // x_B = B⁻¹b − Σ_N (B⁻¹A_j) x_j
        for k in 0..m {
            let mut v = beta[k];
            for j in 0..w {
                if self.state[j] != VarState::Basic {
                    let tj = self.t[k * w + j];
                    if tj != 0.0 {
                        v -= tj * self.x[j];
                    }
                }
            }
            self.x[self.basis[k]] = v;
        }
        self.since_refactor = 0;
        Ok(())
    }

    fn max_row_residual(&self) -> f64 {
        let w = self.width;
        let mut worst = 0.0_f64;
        for i in 0..self.m {
            let row = &self.orig[i * w..(i + 1) * w];
            let lhs: f64 = row.iter().zip(&self.x).map(|(a, x)| a * x).sum();
            worst = worst.max((lhs - self.rhs[i]).abs());
        }
        worst
    }

    fn max_bound_violation(&self) -> f64 {
        self.x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .fold(0.0_f64, |acc, (&x, (&l, &u))| acc.max(l - x).max(x - u))
    }

    /// Refactors when drift is visible and re-optimises; keeps results honest.
    fn polish(&mut self, opts: &SolverOptions) -> Result<Outcome, SolverError> {
        let tol = opts.feasibility_tol * self.rhs_scale;
        for _ in 0..3 {
            if self.max_row_residual() <= tol && self.max_bound_violation() <= tol {
                return Ok(Outcome::Optimal);
            }
            self.refactor()?;
            let cost = self.cost.clone();
            self.recompute_reduced_costs(&cost);
            match self.dual(opts)? {
                Outcome::Optimal => {}
                other => return Ok(other),
            }
            match self.primal(opts, false)? {
                Outcome::Optimal => {}
                other => return Ok(other),
            }
        }
        Ok(Outcome::Optimal)
    }

    /// Changes the bounds of structural variable `j` and re-optimises with dual simplex.
    pub(crate) fn set_bounds_and_resolve(
        &mut self,
        changes: &[(usize, f64, f64)],
        opts: &SolverOptions,
    ) -> Result<Outcome, SolverError> {
        for &(j, lo, hi) in changes {
            self.lower[j] = lo;
            self.upper[j] = hi;
            match self.state[j] {
                VarState::Basic => {}
                VarState::Lower | VarState::Upper => {
                    let target = if self.state[j] == VarState::Upper && hi.is_finite() { hi } else { lo };
                    let delta = target - self.x[j];
                    self.move_nonbasic(j, delta);
                    self.x[j] = target;
                    if target == hi && hi != lo {
                        self.state[j] = VarState::Upper;
                    } else {
                        self.state[j] = VarState::Lower;
                    }
                }
            }
        }
        // Nonbasic variables whose reduced cost now has the wrong sign for their
        // bound (possible when a fixed variable is released) are moved to the
        // bound that keeps the basis dual feasible.
        for j in 0..self.width {
            if self.state[j] == VarState::Basic || self.lower[j] == self.upper[j] {
                continue;
            }
            if self.state[j] == VarState::Lower && self.d[j] < -opts.optimality_tol && self.upper[j].is_finite() {
                let delta = self.upper[j] - self.x[j];
                self.move_nonbasic(j, delta);
                self.x[j] = self.upper[j];
                self.state[j] = VarState::Upper;
            } else if self.state[j] == VarState::Upper && self.d[j] > opts.optimality_tol {
                let delta = self.lower[j] - self.x[j];
                self.move_nonbasic(j, delta);
                self.x[j] = self.lower[j];
                self.state[j] = VarState::Lower;
            }
        }
        match self.dual(opts)? {
            Outcome::Optimal => {}
            other => return Ok(other),
        }
        // Clean up any dual infeasibility left by tolerances.
        match self.primal(opts, false)? {
            Outcome::Optimal => self.polish(opts),
            other => Ok(other),
        }
    }
}

/// Solves a linear program with the bounded primal simplex method.
pub fn solve_lp(problem: &LpProblem, opts: &SolverOptions) -> Result<LpSolution, SolverError> {
    problem.validate()?;
    opts.validate()?;
    let (outcome, tab) = solve_tableau(problem, opts)?;
    Ok(to_solution(outcome, &tab))
}

pub(crate) fn solve_tableau(problem: &LpProblem, opts: &SolverOptions) -> Result<(Outcome, Tableau), SolverError> {
    let mut tab = Tableau::new(problem);
    let outcome = tab.solve_from_scratch(opts)?;
    Ok((outcome, tab))
}

pub(crate) fn to_solution(outcome: Outcome, tab: &Tableau) -> LpSolution {
    match outcome {
        Outcome::Optimal => LpSolution {
            status: LpStatus::Optimal,
            values: tab.structural_values(),
            objective: tab.objective(),
            iterations: tab.iterations,
        },
        Outcome::Infeasible => LpSolution {
            status: LpStatus::Infeasible,
            values: Vec::new(),
            objective: f64::NAN,
            iterations: tab.iterations,
        },
        Outcome::Unbounded => LpSolution {
            status: LpStatus::Unbounded,
            values: Vec::new(),
            objective: f64::NAN,
            iterations: tab.iterations,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    #[test]
    fn single_bounded_variable() {
        let mut lp = LpProblem::new();
        let x = lp.add_var(1.0, 0.0, 10.0);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 3.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 3.0).abs() < 1e-9);
        assert!((s.objective - 3.0).abs() < 1e-9);
    }

    #[test]
    fn simplex_corner() {
        let mut lp = LpProblem::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(-1.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, 1.0)], Relation::Le, 1.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective + 1.0).abs() < 1e-9);
    }

    #[test]
    fn contradictory_bounds_are_infeasible() {
        let mut lp = LpProblem::new();
        let x = lp.add_var(1.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0)], Relation::Ge, 5.0);
        lp.add_row(vec![(x, 1.0)], Relation::Le, 3.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_ray() {
        let mut lp = LpProblem::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, -1.0)], Relation::Le, 2.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Unbounded);
    }

    #[test]
    fn equality_rows_and_upper_bounds() {
        // min 2a + 3b  s.t. a + b = 4, a <= 1.5
        let mut lp = LpProblem::new();
        let a = lp.add_var(2.0, 0.0, 1.5);
        let b = lp.add_var(3.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(a, 1.0), (b, 1.0)], Relation::Eq, 4.0);
        let s = solve_lp(&lp, &opts()).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.values[0] - 1.5).abs() < 1e-9);
        assert!((s.values[1] - 2.5).abs() < 1e-9);
        assert!((s.objective - 10.5).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit_is_an_error() {
        let mut lp = LpProblem::new();
        let x = lp.add_var(-1.0, 0.0, f64::INFINITY);
        let y = lp.add_var(-1.0, 0.0, f64::INFINITY);
        lp.add_row(vec![(x, 1.0), (y, 2.0)], Relation::Le, 4.0);
        lp.add_row(vec![(x, 3.0), (y, 1.0)], Relation::Le, 6.0);
        let o = SolverOptions { max_iterations: 1, ..opts() };
        assert_eq!(solve_lp(&lp, &o), Err(SolverError::IterationLimit(1)));
    }

    #[test]
    fn warm_start_matches_cold_solve() {
        // max x + y over a box cut by two rows, then tighten x.
        let mut lp = LpProblem::new();
        let x = lp.add_var(-1.0, 0.0, 4.0);
        let y = lp.add_var(-1.0, 0.0, 4.0);
        lp.add_row(vec![(x, 1.0), (y, 2.0)], Relation::Le, 6.0);
        lp.add_row(vec![(x, 2.0), (y, 1.0)], Relation::Le, 6.0);
        let (out, mut tab) = solve_tableau(&lp, &opts()).unwrap();
        assert_eq!(out, Outcome::Optimal);
        assert!((tab.objective() + 4.0).abs() < 1e-9);
        let out = tab.set_bounds_and_resolve(&[(x, 0.0, 1.0)], &opts()).unwrap();
        assert_eq!(out, Outcome::Optimal);

        let mut cold = lp.clone();
        cold.upper[x] = 1.0;
        let s = solve_lp(&cold, &opts()).unwrap();
        assert!((tab.objective() - s.objective).abs() < 1e-9);
        assert!((tab.objective() + 3.5).abs() < 1e-9);
    }
}
