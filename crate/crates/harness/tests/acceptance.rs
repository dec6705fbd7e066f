//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.
//!
//! Criteria 6 to 8 share one desk-scale sweep: the basic scenario over the
//! full alpha and eta grids, plus its seasonal variant at alpha = 0.

use std::process::ExitCode;
use std::sync::OnceLock;
use std::time::Instant;

use etaplan::checks::{self, CoarseSweep, Verdict};
use etaplan::{sweep_grid, ExperimentPlan, RunResult};
use etaplan_core::scenario::{alpha_grid, eta_grid, DemandPattern, ScenarioConfig};

/// Forecast error of the coarse U-shape run.
const U_SHAPE_ALPHA: f64 = 0.25;

fn grid_rows() -> &'static Result<Vec<RunResult>, String> {
    static ROWS: OnceLock<Result<Vec<RunResult>, String>> = OnceLock::new();
    ROWS.get_or_init(|| {
        let basic = ScenarioConfig::basic();
        let mut seasonal = basic.clone();
        seasonal.demand_pattern = DemandPattern::Seasonal;
        let mut rows = Vec::new();
        for plan in [
            ExperimentPlan::desk(vec![basic], alpha_grid(), eta_grid()),
            ExperimentPlan::desk(vec![seasonal], vec![0.0], eta_grid()),
        ] {
            let out = sweep_grid(&plan).map_err(|e| e.to_string())?;
            if let Some((cell, msg)) = out.failures.first() {
                return Err(format!("{} failed cells, first {cell}: {msg}", out.failures.len()));
            }
            rows.extend(out.rows);
        }
        Ok(rows)
    })
}

fn coarse() -> &'static Result<CoarseSweep, String> {
    static SWEEP: OnceLock<Result<CoarseSweep, String>> = OnceLock::new();
    SWEEP.get_or_init(|| checks::coarse_sweep(U_SHAPE_ALPHA))
}

fn with_grid(f: impl Fn(&[RunResult]) -> Verdict) -> Verdict {
    match grid_rows() {
        Ok(rows) => f(rows),
        Err(e) => Verdict { pass: false, detail: e.clone() },
    }
}

fn with_coarse(f: impl Fn(&CoarseSweep) -> Verdict) -> Verdict {
    match coarse() {
        Ok(s) => f(s),
        Err(e) => Verdict { pass: false, detail: e.clone() },
    }
}

fn u_shape() -> Verdict {
    let mut v = with_coarse(checks::u_shape);
    // The same grid without forecast error, for the record.
    if let Ok(s) = checks::coarse_sweep(0.0) {
        let info = checks::u_shape(&s);
        v.detail = format!("alpha {U_SHAPE_ALPHA}: {} | alpha 0: {}", v.detail, info.detail);
    }
    v
}

fn main() -> ExitCode {
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Verdict>)> = vec![
        (1, "milp matches enumeration", Box::new(|| checks::milp_oracle(50, 20_240_601))),
        (2, "processing-time calibration", Box::new(checks::calibration)),
        (3, "order rate worked example", Box::new(checks::order_rate_example)),
        (4, "deterministic sanity run", Box::new(checks::deterministic_sanity)),
        (5, "cost is u-shaped in eta", Box::new(u_shape)),
        (6, "forecast error lowers eta* and raises cost", Box::new(|| with_grid(checks::forecast_error_trend))),
        (7, "eta* regresses negatively on alpha", Box::new(|| with_grid(|r| checks::alpha_regression(r, &alpha_grid())))),
        (8, "seasonal demand costs more", Box::new(|| with_grid(checks::seasonality))),
        (9, "mps/mrp properties", Box::new(|| checks::planning_properties(1000, 9))),
        (10, "conservation and determinism", Box::new(checks::conservation_and_determinism)),
        (11, "aggregate plans pass the audit", Box::new(|| with_coarse(checks::plan_audit))),
    ];
    let mut failed = 0;
    for (id, name, check) in &criteria {
        let started = Instant::now();
        let v = check();
        let status = if v.pass { "PASS" } else { "FAIL" };
        println!("{status} {id:>2} {name}: {} [{:.1} s]", v.detail, started.elapsed().as_secs_f64());
        if !v.pass {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
