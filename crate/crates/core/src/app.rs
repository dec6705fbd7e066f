//! Aggregate production planning model: monthly program, planned inventory,
//! shift plans and external capacity.

use std::io::{self, Write};

use etaplan_solver::{
    solve_milp_with_start, FixedBinaryLp, LpProblem, MilpProblem, MilpSolution, MilpStatus, Relation, SolverOptions,
};

use crate::error::PlanError;
use crate::scenario::{MaterialId, ShiftPlan};

pub const PLANNING_HORIZON: usize = 12;
pub const BINDING_MONTHS: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct AppInput {
    pub products: Vec<MaterialId>,
    /// `a[p][j]`: machine-`j` hours for one piece of product `p`, over its
    /// whole bill of material.
    pub a: Vec<Vec<f64>>,
    /// `forecast[p][t]`, pieces per month.
    pub forecast: Vec<Vec<f64>>,
    pub initial_inventory: Vec<f64>,
    pub eta: f64,
    pub internal_rate: f64,
    pub external_rate: f64,
    /// Holding cost per piece and month, per product.
    pub monthly_holding: Vec<f64>,
    pub capacity_ten: f64,
    pub capacity_fifteen: f64,
    pub horizon: usize,
}

impl AppInput {
    pub fn num_machines(&self) -> usize {
        self.a.first().map_or(0, Vec::len)
    }

    fn validate(&self) -> Result<(), PlanError> {
        let p = self.products.len();
        if !(0.0..=1.0).contains(&self.eta) {
            return Err(PlanError::Eta(self.eta));
        }
        if self.a.len() != p || self.initial_inventory.len() != p || self.monthly_holding.len() != p {
            return Err(PlanError::Input("per-product vectors disagree in length".into()));
        }
        let j = self.num_machines();
        if self.a.iter().any(|row| row.len() != j || row.iter().any(|&v| !(v >= 0.0))) {
            return Err(PlanError::Input("processing times must be a non-negative P x J matrix".into()));
        }
        if self.forecast.len() != p {
            return Err(PlanError::Input("forecast needs one series per product".into()));
        }
        for series in &self.forecast {
            if series.len() < self.horizon {
                return Err(PlanError::MissingForecast { needed: self.horizon, got: series.len() });
            }
        }
        if !(self.capacity_ten < self.capacity_fifteen) {
            return Err(PlanError::Input("the 15-shift plan must offer more hours".into()));
        }
        Ok(())
    }
}

/// The MILP plus the variable layout needed to read a solution back.
#[derive(Clone, Debug)]
pub struct AppModel {
    pub milp: MilpProblem,
    pub x: Vec<Vec<usize>>,
    pub l: Vec<Vec<usize>>,
    pub e: Vec<Vec<usize>>,
    /// One binary per `(t, j)`: 1 selects the 15-shift plan.
    pub w: Vec<Vec<usize>>,
}

/// Builds the planning MILP. The two-way shift choice is carried by a single
/// binary per machine-month, with the 10-shift cost moved into the offset.
pub fn build_app_model(input: &AppInput) -> Result<AppModel, PlanError> {
    input.validate()?;
    let (np, nt, nj) = (input.products.len(), input.horizon, input.num_machines());
    let mut lp = LpProblem::new();
    let inf = f64::INFINITY;
    let x: Vec<Vec<usize>> = (0..np)
        .map(|p| (0..nt).map(|t| lp.add_named_var(format!("x_{}_{}", input.products[p], t + 1), 0.0, 0.0, inf)).collect())
        .collect();
    let l: Vec<Vec<usize>> = (0..np)
        .map(|p| {
            (0..nt)
                .map(|t| lp.add_named_var(format!("l_{}_{}", input.products[p], t + 1), input.monthly_holding[p], 0.0, inf))
                .collect()
        })
        .collect();
    let e: Vec<Vec<usize>> = (0..nt)
        .map(|t| (0..nj).map(|j| lp.add_named_var(format!("e_{}_M{}", t + 1, j + 1), input.external_rate, 0.0, inf)).collect())
        .collect();
    let extra = input.capacity_fifteen - input.capacity_ten;
    let w: Vec<Vec<usize>> = (0..nt)
        .map(|t| (0..nj).map(|j| lp.add_named_var(format!("w_{}_M{}", t + 1, j + 1), extra * input.internal_rate, 0.0, 1.0)).collect())
        .collect();
    lp.objective_offset = (nt * nj) as f64 * input.capacity_ten * input.internal_rate;

    for p in 0..np {
        for t in 0..nt {
            let mut coeffs = vec![(l[p][t], 1.0), (x[p][t], -1.0)];
            let rhs = if t == 0 {
                input.initial_inventory[p] - input.forecast[p][t]
            } else {
                coeffs.push((l[p][t - 1], -1.0));
                -input.forecast[p][t]
            };
            lp.add_row(coeffs, Relation::Eq, rhs);
        }
    }
    for t in 0..nt {
        for j in 0..nj {
            let mut coeffs: Vec<(usize, f64)> =
                (0..np).filter(|&p| input.a[p][j] > 0.0).map(|p| (x[p][t], input.a[p][j])).collect();
            coeffs.push((w[t][j], -input.eta * extra));
            coeffs.push((e[t][j], -1.0));
            lp.add_row(coeffs, Relation::Le, input.eta * input.capacity_ten);
        }
    }
    let binaries = w.iter().flatten().copied().collect();
    Ok(AppModel { milp: MilpProblem::new(lp, binaries), x, l, e, w })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AppSolution {
    pub x: Vec<Vec<f64>>,
    pub l: Vec<Vec<f64>>,
    /// `w[t][j] = [w_ten, w_fifteen]`.
    pub w: Vec<Vec<[f64; 2]>>,
    pub e: Vec<Vec<f64>>,
    pub objective: f64,
    pub gap: f64,
    pub nodes: usize,
    pub proven_optimal: bool,
}

impl AppSolution {
    pub fn shift_plan(&self, t: usize, j: usize) -> ShiftPlan {
        if self.w[t][j][1] > 0.5 {
            ShiftPlan::Fifteen
        } else {
            ShiftPlan::Ten
        }
    }

    /// Keeps the first `months` months of every series.
    pub fn truncated(&self, months: usize) -> AppSolution {
        let cut = |v: &Vec<Vec<f64>>| v.iter().map(|s| s[..months.min(s.len())].to_vec()).collect();
        AppSolution {
            x: cut(&self.x),
            l: cut(&self.l),
            w: self.w[..months.min(self.w.len())].to_vec(),
            e: self.e[..months.min(self.e.len())].to_vec(),
            ..self.clone()
        }
    }
}

/// Solver settings used for planning runs.
pub fn default_app_options() -> SolverOptions {
    SolverOptions { gap_tol: 1e-4, max_nodes: 300, ..SolverOptions::default() }
}

pub fn extract_solution(model: &AppModel, sol: &MilpSolution) -> AppSolution {
    let v = &sol.values;
    let read = |idx: &Vec<Vec<usize>>| -> Vec<Vec<f64>> {
        idx.iter().map(|row| row.iter().map(|&i| v[i].max(0.0)).collect()).collect()
    };
    AppSolution {
        x: read(&model.x),
        l: read(&model.l),
        w: model.w.iter().map(|row| row.iter().map(|&i| [1.0 - v[i], v[i]]).collect()).collect(),
        e: read(&model.e),
        objective: sol.objective,
        gap: sol.gap,
        nodes: sol.nodes,
        proven_optimal: sol.status == MilpStatus::Optimal,
    }
}

/// Local search over shift assignments, used to seed branch-and-bound.
///
/// Starts from 15 shifts everywhere (always feasible), then repeatedly tries
/// switching whole months to 10 shifts and flipping single machine-months,
/// keeping every change that lowers the plan cost.
pub fn shift_heuristic(model: &AppModel, opts: &SolverOptions) -> Result<Vec<f64>, PlanError> {
    let (nt, nj) = (model.w.len(), model.w.first().map_or(0, Vec::len));
    let mut asg = vec![1.0; nt * nj];
    let mut lp = FixedBinaryLp::new(&model.milp, &asg, opts)?;
    let Some(mut best) = lp.objective() else {
        return Ok(asg);
    };
    let better = |cand: f64, best: f64| cand < best - 1e-9 * best.abs().max(1.0);
    for _round in 0..4 {
        let mut improved = false;
        for t in 0..nt {
            if asg[t * nj..(t + 1) * nj].iter().all(|&v| v == 0.0) {
                continue;
            }
            let mut cand = asg.clone();
            cand[t * nj..(t + 1) * nj].fill(0.0);
            match lp.evaluate(&cand)? {
                Some(obj) if better(obj, best) => {
                    best = obj;
                    asg = cand;
                    improved = true;
                }
                _ => {}
            }
        }
        for k in 0..nt * nj {
            let mut cand = asg.clone();
            cand[k] = 1.0 - cand[k];
            match lp.evaluate(&cand)? {
                Some(obj) if better(obj, best) => {
                    best = obj;
                    asg = cand;
                    improved = true;
                }
                _ => {}
            }
        }
        if !improved {
            break;
        }
    }
    Ok(asg)
}

pub fn solve_app(input: &AppInput, opts: &SolverOptions) -> Result<AppSolution, PlanError> {
    let model = build_app_model(input)?;
    let start = shift_heuristic(&model, opts)?;
    let sol = solve_milp_with_start(&model.milp, opts, &start)?;
    if !sol.has_solution() {
        return Err(PlanError::NoSolution(format!("{:?} after {} nodes", sol.status, sol.nodes)));
    }
    Ok(extract_solution(&model, &sol))
}

/// Objective recomputed from the solution values.
pub fn plan_cost(input: &AppInput, sol: &AppSolution) -> f64 {
    let caps = [input.capacity_ten, input.capacity_fifteen];
    let mut cost = 0.0;
    for t in 0..input.horizon {
        for j in 0..input.num_machines() {
            cost += sol.e[t][j] * input.external_rate;
            cost += (0..2).map(|s| caps[s] * input.internal_rate * sol.w[t][j][s]).sum::<f64>();
        }
        for p in 0..input.products.len() {
            cost += input.monthly_holding[p] * sol.l[p][t];
        }
    }
    cost
}

/// Checks a plan against the model constraints using only the input data.
/// Returns one message per violated constraint.
pub fn audit_solution(input: &AppInput, sol: &AppSolution, tol: f64) -> Vec<String> {
    let mut bad = Vec::new();
    let (np, nt, nj) = (input.products.len(), input.horizon, input.num_machines());
    let caps = [input.capacity_ten, input.capacity_fifteen];
    let near = |a: f64, b: f64, scale: f64| (a - b).abs() <= tol * scale.max(1.0);
    if sol.x.len() != np || sol.l.len() != np || sol.w.len() != nt || sol.e.len() != nt {
        bad.push("solution dimensions do not match the model".to_string());
        return bad;
    }
    for t in 0..nt {
        for j in 0..nj {
            let w = sol.w[t][j];
            if !near(w[0] + w[1], 1.0, 1.0) {
                bad.push(format!("t={} j={}: shift choices sum to {}", t + 1, j + 1, w[0] + w[1]));
            }
            for s in 0..2 {
                if !(near(w[s], 0.0, 1.0) || near(w[s], 1.0, 1.0)) {
                    bad.push(format!("t={} j={}: w[{s}] = {} is not binary", t + 1, j + 1, w[s]));
                }
            }
            if sol.e[t][j] < -tol {
                bad.push(format!("t={} j={}: negative external capacity", t + 1, j + 1));
            }
            let load: f64 = (0..np).map(|p| sol.x[p][t] * input.a[p][j]).sum();
            let cap: f64 = input.eta * (0..2).map(|s| caps[s] * w[s]).sum::<f64>() + sol.e[t][j];
            if load > cap + tol * load.abs().max(cap.abs()).max(1.0) {
                bad.push(format!("t={} j={}: load {load} exceeds capacity {cap}", t + 1, j + 1));
            }
        }
    }
    for p in 0..np {
        for t in 0..nt {
            let prev = if t == 0 { input.initial_inventory[p] } else { sol.l[p][t - 1] };
            let rhs = prev + sol.x[p][t] - input.forecast[p][t];
            let scale = prev.abs() + sol.x[p][t].abs() + input.forecast[p][t].abs();
            if !near(sol.l[p][t], rhs, scale) {
                bad.push(format!("p={} t={}: inventory balance {} vs {rhs}", input.products[p], t + 1, sol.l[p][t]));
            }
            if sol.x[p][t] < -tol || sol.l[p][t] < -tol {
                bad.push(format!("p={} t={}: negative production or inventory", input.products[p], t + 1));
            }
        }
    }
    let recomputed = plan_cost(input, sol);
    if !near(recomputed, sol.objective, sol.objective.abs()) {
        bad.push(format!("objective {} differs from recomputed cost {recomputed}", sol.objective));
    }
    bad
}

/// Writes `month,entity,variable,value` rows.
pub fn write_plan_csv<W: Write>(out: &mut W, input: &AppInput, sol: &AppSolution, first_month: u32) -> io::Result<()> {
    writeln!(out, "month,entity,variable,value")?;
    for t in 0..sol.w.len() {
        let m = first_month + t as u32;
        for (p, id) in input.products.iter().enumerate() {
            writeln!(out, "{m},{id},x,{}", sol.x[p][t])?;
            writeln!(out, "{m},{id},l,{}", sol.l[p][t])?;
        }
        for j in 0..sol.w[t].len() {
            let shifts = if sol.shift_plan(t, j) == ShiftPlan::Fifteen { 15 } else { 10 };
            writeln!(out, "{m},M{},shifts,{shifts}", j + 1)?;
            writeln!(out, "{m},M{},e,{}", j + 1, sol.e[t][j])?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_machine(required_hours: f64, eta: f64) -> AppInput {
        AppInput {
            products: vec![10],
            a: vec![vec![0.08]],
            forecast: vec![vec![required_hours / 0.08]],
            initial_inventory: vec![0.0],
            eta,
            internal_rate: 100.0,
            external_rate: 200.0,
            monthly_holding: vec![28.0],
            capacity_ten: 320.0,
            capacity_fifteen: 480.0,
            horizon: 1,
        }
    }

    #[test]
    fn one_machine_month() {
        let opts = SolverOptions::default();
        let s = solve_app(&single_machine(320.0, 1.0), &opts).unwrap();
        assert!((s.objective - 32_000.0).abs() < 1e-6);
        assert_eq!(s.shift_plan(0, 0), ShiftPlan::Ten);
        let s = solve_app(&single_machine(320.0, 0.8), &opts).unwrap();
        assert!((s.objective - 44_800.0).abs() < 1e-6);
        assert!((s.e[0][0] - 64.0).abs() < 1e-6);
        assert!(audit_solution(&single_machine(320.0, 0.8), &s, 1e-6).is_empty());
    }

    #[test]
    fn zero_eta_moves_all_work_outside() {
        let input = single_machine(400.0, 0.0);
        let s = solve_app(&input, &SolverOptions::default()).unwrap();
        assert!((s.e[0][0] - 400.0).abs() < 1e-6);
        assert_eq!(s.shift_plan(0, 0), ShiftPlan::Ten);
        assert!((s.objective - (32_000.0 + 80_000.0)).abs() < 1e-6);
    }

    #[test]
    fn auditor_catches_a_broken_balance() {
        let input = single_machine(320.0, 1.0);
        let mut s = solve_app(&input, &SolverOptions::default()).unwrap();
        s.l[0][0] += 5.0;
        let issues = audit_solution(&input, &s, 1e-6);
        assert!(issues.iter().any(|m| m.contains("inventory balance")));
    }

    #[test]
    fn missing_months_are_rejected() {
        let mut input = single_machine(320.0, 1.0);
        input.horizon = 3;
        assert_eq!(build_app_model(&input).unwrap_err(), PlanError::MissingForecast { needed: 3, got: 1 });
    }
}
