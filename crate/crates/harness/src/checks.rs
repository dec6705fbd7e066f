//! Self-checks shared by the `selftest` command and the acceptance target.
//! Each check returns a verdict and a one-line measurement summary.

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use etaplan_core::app::{audit_solution, build_app_model, AppInput};
use etaplan_core::demand::{base_forecast, order_rate};
use etaplan_core::mrp::{compute_mps, run_mrp, MrpParams, MrpState, OrderState, ProductionOrder};
use etaplan_core::plant::Plant;
use etaplan_core::scenario::{
    build_structure, calibrate_processing_times, MaterialId, MaterialKind, NoiseMode, ScenarioConfig, Structure,
    StructureKind, NUM_MACHINES,
};
use etaplan_core::sim::{simulate, write_trace_csv, SimOptions};
use etaplan_solver::{enumerate_exact_with, solve_milp, SolverOptions};

use crate::analysis::{mean_by_eta, mean_cost_by_eta, optimal_eta, regress_alpha, select_optimal_eta};
use crate::experiment::{replication_seed, run_replication_detailed, ExperimentPlan, RunResult};
use crate::io::results_to_string;

#[derive(Clone, Debug)]
pub struct Verdict {
    pub pass: bool,
    pub detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self { pass, detail: detail.into() }
    }

    fn fail(detail: impl Into<String>) -> Self {
        Self::new(false, detail)
    }
}

fn random_app_input(rng: &mut ChaCha8Rng) -> AppInput {
    let nt = rng.random_range(1..=3);
    let nj = rng.random_range(1..=2);
    let np = rng.random_range(1..=2);
    let internal = rng.random_range(20.0..200.0);
    AppInput {
        products: (0..np as MaterialId).map(|p| 10 + p).collect(),
        a: (0..np).map(|_| (0..nj).map(|_| rng.random_range(0.0..0.6)).collect()).collect(),
        forecast: (0..np).map(|_| (0..nt).map(|_| rng.random_range(0.0..1500.0)).collect()).collect(),
        initial_inventory: (0..np).map(|_| rng.random_range(0.0..300.0)).collect(),
        eta: rng.random_range(0.5..=1.0),
        internal_rate: internal,
        external_rate: internal * rng.random_range(1.1..4.0),
        monthly_holding: (0..np).map(|_| rng.random_range(0.5..60.0)).collect(),
        capacity_ten: 320.0,
        capacity_fifteen: 480.0,
        horizon: nt,
    }
}

/// Branch-and-bound against exhaustive enumeration on random small plans.
pub fn milp_oracle(instances: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let opts = SolverOptions::default();
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for k in 0..instances {
        let input = random_app_input(&mut rng);
        let model = match build_app_model(&input) {
            Ok(m) => m,
            Err(e) => return Verdict::fail(format!("instance {k}: {e}")),
        };
        let (bb, ex) = match (solve_milp(&model.milp, &opts), enumerate_exact_with(&model.milp, &opts)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Verdict::fail(format!("instance {k}: {e}")),
        };
        if bb.has_solution() != ex.has_solution() {
            return Verdict::fail(format!("instance {k}: status {:?} vs {:?}", bb.status, ex.status));
        }
        if ex.has_solution() {
            let rel = (bb.objective - ex.objective).abs() / ex.objective.abs().max(1.0);
            worst = worst.max(rel);
        }
    }
    let secs = started.elapsed().as_secs_f64();
    Verdict::new(
        worst <= 1e-6 && secs < 10.0,
        format!("{instances} instances, worst relative gap {worst:.2e}, {secs:.2} s"),
    )
}

/// Per-operation times at the medium load and equal loads on all machines.
pub fn calibration() -> Verdict {
    let mut detail = Vec::new();
    let mut pass = true;
    for kind in StructureKind::ALL {
        let s = build_structure(kind);
        let demand: BTreeMap<MaterialId, f64> = s.finished().into_iter().map(|p| (p, base_forecast(p))).collect();
        for rho in [2.0, 2.2, 2.5, 2.8, 3.0] {
            let a = match calibrate_processing_times(&s, &demand, rho) {
                Ok(a) => a,
                Err(e) => return Verdict::fail(format!("{kind}: {e}")),
            };
            let mut load = [0.0; NUM_MACHINES];
            for (&p, &d) in &demand {
                let ops = s.operations_per_piece(p);
                for j in 0..NUM_MACHINES {
                    load[j] += d * ops[j] as f64 * a[j];
                }
            }
            let max = load.iter().cloned().fold(f64::MIN, f64::max);
            let min = load.iter().cloned().fold(f64::MAX, f64::min);
            if (max - min) / max > 1e-9 {
                pass = false;
                detail.push(format!("{kind} rho={rho} loads spread {min}..{max}"));
            }
            if rho == 2.5 {
                // Piece-operations per month on M1..M6, counted by hand from the bills of material.
                let ops: [f64; NUM_MACHINES] = match kind {
                    StructureKind::FlowMany => [4500.0, 5500.0, 3500.0, 4000.0, 5000.0, 5000.0],
                    StructureKind::FlowLow => [2500.0; NUM_MACHINES],
                    StructureKind::JobMany => [7500.0, 5000.0, 7500.0, 7500.0, 5000.0, 7500.0],
                };
                let ok = (0..NUM_MACHINES).all(|j| (a[j] - 400.0 / ops[j]).abs() < 1e-12);
                let expect = match kind {
                    StructureKind::FlowMany => 0.08,
                    StructureKind::FlowLow => 0.16,
                    StructureKind::JobMany => 400.0 / 5000.0,
                };
                pass &= ok && (a[4] - expect).abs() < 1e-12;
                detail.push(format!("{kind} M5 {:.2} min", a[4] * 60.0));
            }
        }
    }
    Verdict::new(pass, detail.join(", "))
}

pub fn order_rate_example() -> Verdict {
    let r = order_rate(1000.0 + 200.0, 10.0);
    Verdict::new(r == 120.0, format!("rate {r}"))
}

/// Basic scenario without forecast error or order noise at full planned utilization.
pub fn deterministic_sanity() -> Verdict {
    let mut cfg = ScenarioConfig::basic();
    cfg.alpha = 0.0;
    cfg.eta = 1.0;
    cfg.noise = NoiseMode::Degenerate;
    let started = Instant::now();
    let plant = match Plant::new(&cfg) {
        Ok(p) => p,
        Err(e) => return Verdict::fail(e.to_string()),
    };
    let out = match simulate(&plant, replication_seed(cfg.seed, &cfg.scenario_id(), 0), &SimOptions::default()) {
        Ok(o) => o,
        Err(e) => return Verdict::fail(e.to_string()),
    };
    let secs = started.elapsed().as_secs_f64();
    let r = &out.report;
    let bo = r.ledger.backorder + r.ledger.end_penalty;
    Verdict::new(
        r.service_level == 1.0 && bo == 0.0 && secs < 30.0,
        format!("service level {}, backorder {bo}, {} orders, {secs:.1} s", r.service_level, r.orders),
    )
}

fn cum(v: &[i64]) -> Vec<i64> {
    v.iter()
        .scan(0, |s, &x| {
            *s += x;
            Some(*s)
        })
        .collect()
}

/// Demand never exceeds cumulative coverage, and coverage is exactly the
/// largest shortfall: `(covered, minimal)`.
fn lot_for_lot_ok(gross: &[i64], receipts: &[i64], new: &[i64], available: i64) -> (bool, bool) {
    let (cg, cr, cn) = (cum(gross), cum(receipts), cum(new));
    let covered = (0..gross.len()).all(|k| available + cr[k] + cn[k] >= cg[k]);
    let shortfall = (0..gross.len()).map(|k| cg[k] - cr[k] - available).max().unwrap_or(0).max(0);
    (covered, cn.last().copied().unwrap_or(0) == shortfall)
}

struct MrpCase {
    structure: Structure,
    params: MrpParams,
    today: u32,
    mps: BTreeMap<MaterialId, Vec<i64>>,
    on_hand: BTreeMap<MaterialId, i64>,
    open: Vec<ProductionOrder>,
}

fn random_mrp_case(rng: &mut ChaCha8Rng) -> MrpCase {
    let structure = build_structure(StructureKind::ALL[rng.random_range(0..3)]);
    let mut params = MrpParams::default();
    let today = rng.random_range(0..400);
    let h = params.mrp_horizon;
    let mut mps = BTreeMap::new();
    let mut on_hand = BTreeMap::new();
    for m in &structure.materials {
        if m.kind == MaterialKind::Raw {
            continue;
        }
        on_hand.insert(m.id, rng.random_range(0..300));
        if rng.random_bool(0.5) {
            params.safety_stock.insert(m.id, rng.random_range(0..150));
        }
    }
    for p in structure.finished() {
        let program: Vec<i64> = (0..params.mps_horizon).map(|_| if rng.random_bool(0.7) { rng.random_range(0..40) } else { 0 }).collect();
        let demand: Vec<i64> = (0..params.mps_horizon).map(|_| if rng.random_bool(0.3) { rng.random_range(0..80) } else { 0 }).collect();
        mps.insert(p, compute_mps(&program, &demand, rng.random_range(0..200)));
    }
    let mut open = Vec::new();
    let ids: Vec<MaterialId> = on_hand.keys().copied().collect();
    for k in 0..rng.random_range(0..12) {
        let due = today + rng.random_range(0..h as u32);
        let state = match rng.random_range(0..4) {
            0 => OrderState::Planned,
            1 => OrderState::Released,
            2 => OrderState::InProcess { operation: 0 },
            _ => OrderState::Finished,
        };
        open.push(ProductionOrder {
            id: 10_000 + k,
            material: ids[rng.random_range(0..ids.len())],
            quantity: rng.random_range(1..60),
            start: due.saturating_sub(2).max(today),
            due,
            state,
        });
    }
    MrpCase { structure, params, today, mps, on_hand, open }
}

/// Cumulative dominance of the MPS, lot-for-lot coverage and minimality
/// of every MRP run, and idempotence when the result is fed back.
pub fn planning_properties(instances: usize, seed: u64) -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..instances {
        let n = rng.random_range(1..90);
        let program: Vec<i64> = (0..n).map(|_| rng.random_range(0..50)).collect();
        let demand: Vec<i64> = (0..n).map(|_| if rng.random_bool(0.4) { rng.random_range(0..120) } else { 0 }).collect();
        let target = rng.random_range(-100..300);
        let mps = compute_mps(&program, &demand, target);
        let (cm, cp, cd) = (cum(&mps), cum(&program), cum(&demand));
        for i in 0..n {
            if mps[i] < 0 || cm[i] < cd[i] || cm[i] < cp[i] + target {
                return Verdict::fail(format!("mps instance {k}, day {i}: dominance violated"));
            }
            let exact = cd[i].max(cp[i] + target).max(if i > 0 { cm[i - 1] } else { 0 });
            if cm[i] != exact {
                return Verdict::fail(format!("mps instance {k}, day {i}: cumulative {} vs {exact}", cm[i]));
            }
        }

        let case = random_mrp_case(&mut rng);
        let state = MrpState { today: case.today, mps: &case.mps, on_hand: &case.on_hand, open_orders: &case.open };
        let new = run_mrp(&case.structure, &case.params, &state, 1);
        if let Err(msg) = check_mrp(&case, &new) {
            return Verdict::fail(format!("mrp instance {k}: {msg}"));
        }
        let mut firm = case.open.clone();
        firm.extend(new.iter().cloned());
        let again = MrpState { open_orders: &firm, ..state };
        let extra = run_mrp(&case.structure, &case.params, &again, 1 + new.len());
        if !extra.is_empty() {
            return Verdict::fail(format!("mrp instance {k}: rerun added {} orders", extra.len()));
        }
    }
    Verdict::new(true, format!("{instances} mps and {instances} mrp instances"))
}

/// Rebuilds every requirement from the MPS and the orders and checks
/// coverage level by level.
fn check_mrp(case: &MrpCase, new: &[ProductionOrder]) -> Result<(), String> {
    let h = case.params.mrp_horizon;
    let at = |day: u32| (day - case.today) as usize;
    let mut gross: BTreeMap<MaterialId, Vec<i64>> = BTreeMap::new();
    let mut receipts: BTreeMap<MaterialId, Vec<i64>> = BTreeMap::new();
    let mut planned: BTreeMap<MaterialId, Vec<i64>> = BTreeMap::new();
    for (&p, d) in &case.mps {
        let mut g = d.clone();
        g.resize(h, 0);
        g.truncate(h);
        gross.insert(p, g);
    }
    let explode = |gross: &mut BTreeMap<MaterialId, Vec<i64>>, o: &ProductionOrder| {
        for &(c, per) in &case.structure.material(o.material).components {
            if case.structure.material(c).kind != MaterialKind::Raw && at(o.start) < h {
                gross.entry(c).or_insert_with(|| vec![0; h])[at(o.start)] += o.quantity * per as i64;
            }
        }
    };
    for o in case.open.iter().filter(|o| o.state != OrderState::Finished) {
        if at(o.due) < h {
            receipts.entry(o.material).or_insert_with(|| vec![0; h])[at(o.due)] += o.quantity;
        }
        if o.state == OrderState::Planned {
            explode(&mut gross, o);
        }
    }
    for o in new {
        if o.quantity <= 0 || o.start > o.due || o.start < case.today || o.state != OrderState::Planned {
            return Err(format!("malformed order {o:?}"));
        }
        if at(o.due) >= h {
            return Err(format!("order {} due outside the horizon", o.id));
        }
        planned.entry(o.material).or_insert_with(|| vec![0; h])[at(o.due)] += o.quantity;
        explode(&mut gross, o);
    }
    let zero = vec![0; h];
    for (&m, g) in &gross {
        let avail = case.on_hand.get(&m).copied().unwrap_or(0) - case.params.safety_stock_of(m);
        let r = receipts.get(&m).unwrap_or(&zero);
        let n = planned.get(&m).unwrap_or(&zero);
        let (covered, minimal) = lot_for_lot_ok(g, r, n, avail);
        if !covered {
            return Err(format!("material {m} short"));
        }
        if !minimal {
            return Err(format!("material {m} over-planned"));
        }
    }
    if planned.keys().any(|m| !gross.contains_key(m)) {
        return Err("orders for a material without requirements".into());
    }
    Ok(())
}

/// Invariant-checked traced run, repeated to compare the outputs byte for byte.
pub fn conservation_and_determinism() -> Verdict {
    let mut cfg = ScenarioConfig::basic();
    cfg.alpha = 0.25;
    cfg.eta = 0.9;
    let opts = SimOptions { trace: true, check_invariants: true };
    let seed = replication_seed(cfg.seed, &cfg.scenario_id(), 0);
    let run = || -> Result<(String, u64, usize), String> {
        let (row, out) = run_replication_detailed(&cfg, 0, seed, &opts).map_err(|e| e.to_string())?;
        let mut buf = Vec::new();
        write_trace_csv(&mut buf, &out.trace).map_err(|e| e.to_string())?;
        let mut text = String::from_utf8(buf).map_err(|e| e.to_string())?;
        text.push_str(&results_to_string(&[row]).map_err(|e| e.to_string())?);
        Ok((text, out.invariant_checks, out.trace.len()))
    };
    match (run(), run()) {
        (Ok((a, checks, events)), Ok((b, _, _))) => Verdict::new(
            a == b && checks > 0 && events > 0,
            format!("{events} traced events, {checks} conservation checks, identical output: {}", a == b),
        ),
        (Err(e), _) | (_, Err(e)) => Verdict::fail(e),
    }
}

/// Outcome of the coarse eta sweep on the basic scenario, with every
/// aggregate plan audited along the way.
#[derive(Clone, Debug)]
pub struct CoarseSweep {
    pub rows: Vec<RunResult>,
    pub plans: usize,
    pub violations: Vec<String>,
    pub seconds: f64,
}

pub fn coarse_eta_grid() -> Vec<f64> {
    vec![0.5, 0.6, 0.7, 0.8, 0.9, 1.0]
}

pub fn coarse_sweep(alpha: f64) -> Result<CoarseSweep, String> {
    use rayon::prelude::*;
    let plan = ExperimentPlan::desk(vec![ScenarioConfig::basic()], vec![alpha], coarse_eta_grid());
    plan.validate().map_err(|e| e.to_string())?;
    let started = Instant::now();
    let opts = SimOptions::default();
    let runs: Vec<Result<(RunResult, usize, Vec<String>), String>> = plan
        .cells()
        .par_iter()
        .map(|(cfg, rep, seed)| {
            let (row, out) = run_replication_detailed(cfg, *rep, *seed, &opts).map_err(|e| e.to_string())?;
            let mut bad = Vec::new();
            for p in &out.plans {
                for v in audit_solution(&p.input, &p.solution, 1e-6) {
                    bad.push(format!("eta={} rep={rep} day {}: {v}", cfg.eta, p.day));
                }
            }
            Ok((row, out.plans.len(), bad))
        })
        .collect();
    let mut sweep = CoarseSweep { rows: Vec::new(), plans: 0, violations: Vec::new(), seconds: 0.0 };
    for r in runs {
        let (row, n, bad) = r?;
        sweep.rows.push(row);
        sweep.plans += n;
        sweep.violations.extend(bad);
    }
    sweep.rows.sort_by(RunResult::key_cmp);
    sweep.seconds = started.elapsed().as_secs_f64();
    Ok(sweep)
}

/// Both ends of the eta range cost at least 5% more than the best level,
/// and service at full utilization falls short of service at the optimum.
pub fn u_shape(sweep: &CoarseSweep) -> Verdict {
    let curve = mean_cost_by_eta(&sweep.rows);
    let service = mean_by_eta(&sweep.rows, |r| r.service_level);
    let Some((eta_opt, best)) = select_optimal_eta(&curve) else {
        return Verdict::fail("no rows");
    };
    let at = |v: &[(f64, f64)], eta: f64| v.iter().find(|p| (p.0 - eta).abs() < 1e-9).map(|p| p.1);
    let (Some(lo), Some(hi)) = (at(&curve, 0.5), at(&curve, 1.0)) else {
        return Verdict::fail("grid ends missing");
    };
    let (Some(sl_hi), Some(sl_opt)) = (at(&service, 1.0), at(&service, eta_opt)) else {
        return Verdict::fail("service levels missing");
    };
    let left = 100.0 * (lo / best - 1.0);
    let right = 100.0 * (hi / best - 1.0);
    Verdict::new(
        left >= 5.0 && right >= 5.0 && sl_hi < sl_opt && sweep.seconds < 900.0,
        format!(
            "eta*={eta_opt:.2}, cost(0.5) {left:+.1}%, cost(1.0) {right:+.1}%, service {sl_hi:.3} at 1.0 vs {sl_opt:.3} at eta*, {:.0} s",
            sweep.seconds
        ),
    )
}

pub fn plan_audit(sweep: &CoarseSweep) -> Verdict {
    let detail = match sweep.violations.first() {
        Some(v) => format!("{} plans, {} violations, first: {v}", sweep.plans, sweep.violations.len()),
        None => format!("{} plans audited, no violations", sweep.plans),
    };
    Verdict::new(sweep.plans > 0 && sweep.violations.is_empty(), detail)
}

/// Rows of one (scenario, alpha) cell.
pub fn cell(rows: &[RunResult], scenario: &str, alpha: f64) -> Vec<RunResult> {
    rows.iter()
        .filter(|r| r.scenario_id == scenario && (r.alpha - alpha).abs() < 1e-9)
        .cloned()
        .collect()
}

pub fn forecast_error_trend(rows: &[RunResult]) -> Verdict {
    let (Some((e0, c0)), Some((e5, c5))) = (optimal_eta(&cell(rows, "f_m_c", 0.0)), optimal_eta(&cell(rows, "f_m_c", 0.5)))
    else {
        return Verdict::fail("alpha 0 or 0.5 missing");
    };
    let drop = 100.0 * (e0 - e5);
    let rise = 100.0 * (c5 / c0 - 1.0);
    Verdict::new(
        drop >= 5.0 - 1e-9 && rise >= 10.0,
        format!("eta* {e0:.2} -> {e5:.2} ({drop:.0} pts), optimal cost {c0:.1} -> {c5:.1} ({rise:+.1}%)"),
    )
}

pub fn alpha_regression(rows: &[RunResult], alphas: &[f64]) -> Verdict {
    let mut pts = Vec::new();
    for &a in alphas {
        match optimal_eta(&cell(rows, "f_m_c", a)) {
            Some((e, _)) => pts.push((a, e)),
            None => return Verdict::fail(format!("alpha {a} missing")),
        }
    }
    match regress_alpha(&pts) {
        Ok(r) => Verdict::new(
            r.slope < -0.2 && !r.r_undefined && r.r < -0.9,
            format!("beta {:.3}, R {:.3}, eta* by alpha {:?}", r.slope, r.r, pts.iter().map(|p| p.1).collect::<Vec<_>>()),
        ),
        Err(e) => Verdict::fail(e.to_string()),
    }
}

pub fn seasonality(rows: &[RunResult]) -> Verdict {
    match (optimal_eta(&cell(rows, "f_m_c", 0.0)), optimal_eta(&cell(rows, "f_m_s", 0.0))) {
        (Some((ec, cc)), Some((es, cs))) => Verdict::new(
            cs > cc,
            format!("constant {cc:.1} at {ec:.2}, seasonal {cs:.1} at {es:.2} ({:+.2}%)", 100.0 * (cs / cc - 1.0)),
        ),
        _ => Verdict::fail("f_m_c or f_m_s missing at alpha 0"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lot_for_lot_oracle() {
        assert_eq!(lot_for_lot_ok(&[10, 0, 5], &[0, 0, 0], &[10, 0, 5], 0), (true, true));
        assert_eq!(lot_for_lot_ok(&[10, 0, 5], &[0, 0, 0], &[10, 0, 0], 0), (false, false));
        assert_eq!(lot_for_lot_ok(&[10, 0, 5], &[0, 0, 0], &[20, 0, 0], 0), (true, false));
        assert_eq!(lot_for_lot_ok(&[10], &[0], &[0], 12), (true, true));
    }

    #[test]
    fn fast_checks() {
        assert!(milp_oracle(10, 7).pass);
        assert!(calibration().pass);
        assert!(order_rate_example().pass);
        let v = planning_properties(100, 3);
        assert!(v.pass, "{}", v.detail);
    }
}
