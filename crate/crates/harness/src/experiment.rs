//! Experiment plans, per-run results and grid sweeps.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use etaplan_core::plant::Plant;
use etaplan_core::rng::{derive_seed, label_hash};
use etaplan_core::scenario::{
    alpha_grid, eta_grid, DemandPattern, Level, ScenarioConfig, StructureKind, ALPHA_MAX, ETA_MAX, ETA_MIN,
};
use etaplan_core::sim::{simulate, SimOptions, SimOutput};

use crate::error::HarnessError;

/// Seed of one replication. Depends on the scenario and the replication
/// only, so every alpha and eta level sees the same random streams.
pub fn replication_seed(base: u64, scenario_id: &str, rep: u32) -> u64 {
    derive_seed(base, &[label_hash(scenario_id), rep as u64])
}

/// One row of the results table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub scenario_id: String,
    pub structure: StructureKind,
    pub pattern: DemandPattern,
    pub rho: f64,
    pub cap_cost_level: Level,
    pub bo_cost_level: Level,
    pub alpha: f64,
    pub eta: f64,
    pub rep: u32,
    pub seed: u64,
    pub cost_total: f64,
    pub cost_internal: f64,
    pub cost_external: f64,
    pub cost_holding: f64,
    pub cost_backorder: f64,
    pub service_level: f64,
    #[serde(rename = "util_M1")]
    pub util_m1: f64,
    #[serde(rename = "util_M2")]
    pub util_m2: f64,
    #[serde(rename = "util_M3")]
    pub util_m3: f64,
    #[serde(rename = "util_M4")]
    pub util_m4: f64,
    #[serde(rename = "util_M5")]
    pub util_m5: f64,
    #[serde(rename = "util_M6")]
    pub util_m6: f64,
}

impl RunResult {
    pub fn utilization(&self) -> [f64; 6] {
        [self.util_m1, self.util_m2, self.util_m3, self.util_m4, self.util_m5, self.util_m6]
    }

    /// Orders rows by (scenario id, alpha, eta, replication).
    pub fn key_cmp(&self, other: &Self) -> Ordering {
        self.scenario_id
            .cmp(&other.scenario_id)
            .then(self.alpha.total_cmp(&other.alpha))
            .then(self.eta.total_cmp(&other.eta))
            .then(self.rep.cmp(&other.rep))
    }
}

fn result_row(cfg: &ScenarioConfig, rep: u32, seed: u64, out: &SimOutput) -> RunResult {
    let r = &out.report;
    let u = r.utilization;
    RunResult {
        scenario_id: cfg.scenario_id(),
        structure: cfg.structure,
        pattern: cfg.demand_pattern,
        rho: cfg.rho,
        cap_cost_level: cfg.capacity_cost_level,
        bo_cost_level: cfg.backorder_cost_level,
        alpha: cfg.alpha,
        eta: cfg.eta,
        rep,
        seed,
        cost_total: r.cost_total(),
        cost_internal: r.cost_internal(),
        cost_external: r.cost_external(),
        cost_holding: r.cost_holding(),
        cost_backorder: r.cost_backorder(),
        service_level: r.service_level,
        util_m1: u[0],
        util_m2: u[1],
        util_m3: u[2],
        util_m4: u[3],
        util_m5: u[4],
        util_m6: u[5],
    }
}

/// Runs one replication and keeps the full simulation output.
pub fn run_replication_detailed(
    cfg: &ScenarioConfig,
    rep: u32,
    seed: u64,
    opts: &SimOptions,
) -> Result<(RunResult, SimOutput), HarnessError> {
    let plant = Plant::new(cfg)?;
    let out = simulate(&plant, seed, opts).map_err(|source| HarnessError::Run { cell: cell_label(cfg, rep), source })?;
    Ok((result_row(cfg, rep, seed, &out), out))
}

pub fn run_replication(cfg: &ScenarioConfig, rep: u32, seed: u64) -> Result<RunResult, HarnessError> {
    Ok(run_replication_detailed(cfg, rep, seed, &SimOptions::default())?.0)
}

fn cell_label(cfg: &ScenarioConfig, rep: u32) -> String {
    format!("{} alpha={} eta={} rep={}", cfg.scenario_id(), cfg.alpha, cfg.eta, rep)
}

/// Grid of scenarios, forecast errors, utilization factors and replications.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentPlan {
    /// Scenario settings; `alpha` and `eta` are overridden per cell.
    pub scenarios: Vec<ScenarioConfig>,
    pub alphas: Vec<f64>,
    pub etas: Vec<f64>,
    pub replications: u32,
    pub base_seed: u64,
    pub years: u32,
    pub warmup_years: u32,
}

impl ExperimentPlan {
    /// Two simulated years with one of warmup and three replications.
    pub fn desk(scenarios: Vec<ScenarioConfig>, alphas: Vec<f64>, etas: Vec<f64>) -> Self {
        let base_seed = scenarios.first().map_or(20_240_601, |s| s.seed);
        Self { scenarios, alphas, etas, replications: 3, base_seed, years: 2, warmup_years: 1 }
    }

    /// Four years with one of warmup and ten replications.
    pub fn full_scale(mut self) -> Self {
        self.years = 4;
        self.warmup_years = 1;
        self.replications = 10;
        self
    }

    /// Every combination of the scenario factors at the medium setting
    /// of nothing: 3 structures x 2 patterns x 3 loads x 3 x 3 cost levels.
    pub fn full_factorial() -> Self {
        let mut scenarios = Vec::new();
        for structure in StructureKind::ALL {
            for pattern in [DemandPattern::Constant, DemandPattern::Seasonal] {
                for rho in [2.2, 2.5, 2.8] {
                    for cap in Level::ALL {
                        for bo in Level::ALL {
                            let mut s = ScenarioConfig::basic();
                            s.structure = structure;
                            s.demand_pattern = pattern;
                            s.rho = rho;
                            s.capacity_cost_level = cap;
                            s.backorder_cost_level = bo;
                            scenarios.push(s);
                        }
                    }
                }
            }
        }
        Self::desk(scenarios, alpha_grid(), eta_grid()).full_scale()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Validation(m.to_string()));
        if self.scenarios.is_empty() {
            return bad("no scenarios");
        }
        if self.etas.is_empty() {
            return bad("empty eta grid");
        }
        if self.alphas.is_empty() {
            return bad("empty alpha grid");
        }
        if self.replications == 0 {
            return bad("at least one replication is needed");
        }
        if self.years == 0 || self.warmup_years >= self.years {
            return bad("the warmup must leave at least one evaluated year");
        }
        if let Some(e) = self.etas.iter().find(|&&e| !(ETA_MIN - 1e-12..=ETA_MAX + 1e-12).contains(&e)) {
            return Err(HarnessError::Validation(format!("eta {e} outside [{ETA_MIN}, {ETA_MAX}]")));
        }
        if let Some(a) = self.alphas.iter().find(|&&a| !(0.0..=ALPHA_MAX + 1e-12).contains(&a)) {
            return Err(HarnessError::Validation(format!("alpha {a} outside [0, {ALPHA_MAX}]")));
        }
        for s in &self.scenarios {
            s.validate()?;
        }
        Ok(())
    }

    /// All cells as concrete configs with their replication and seed.
    pub fn cells(&self) -> Vec<(ScenarioConfig, u32, u64)> {
        let mut cells = Vec::new();
        for s in &self.scenarios {
            let id = s.scenario_id();
            for &alpha in &self.alphas {
                for &eta in &self.etas {
                    for rep in 0..self.replications {
                        let mut cfg = s.clone();
                        cfg.alpha = alpha;
                        cfg.eta = eta;
                        cfg.years = self.years;
                        cfg.warmup_years = self.warmup_years;
                        cfg.replications = self.replications;
                        cfg.seed = self.base_seed;
                        cells.push((cfg, rep, replication_seed(self.base_seed, &id, rep)));
                    }
                }
            }
        }
        cells
    }
}

#[derive(Clone, Debug, Default)]
pub struct SweepOutcome {
    /// Sorted by (scenario id, alpha, eta, replication).
    pub rows: Vec<RunResult>,
    /// Label and message of every failed cell.
    pub failures: Vec<(String, String)>,
}

/// Runs every cell of the plan in parallel and returns the sorted rows.
pub fn sweep_grid(plan: &ExperimentPlan) -> Result<SweepOutcome, HarnessError> {
    plan.validate()?;
    let results: Vec<Result<RunResult, (String, String)>> = plan
        .cells()
        .par_iter()
        .map(|(cfg, rep, seed)| run_replication(cfg, *rep, *seed).map_err(|e| (cell_label(cfg, *rep), e.to_string())))
        .collect();
    let mut out = SweepOutcome::default();
    for r in results {
        match r {
            Ok(row) => out.rows.push(row),
            Err(f) => out.failures.push(f),
        }
    }
    out.rows.sort_by(RunResult::key_cmp);
    out.failures.sort();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_ignore_alpha_and_eta() {
        let mut plan = ExperimentPlan::desk(vec![ScenarioConfig::basic()], vec![0.0, 0.5], vec![0.9, 1.0]);
        plan.replications = 2;
        let cells = plan.cells();
        assert_eq!(cells.len(), 8);
        for (cfg, rep, seed) in &cells {
            assert_eq!(*seed, replication_seed(plan.base_seed, &cfg.scenario_id(), *rep));
        }
        assert_ne!(cells[0].2, cells[1].2);
    }

    #[test]
    fn validation() {
        let ok = ExperimentPlan::desk(vec![ScenarioConfig::basic()], vec![0.0], vec![0.9]);
        assert!(ok.validate().is_ok());
        let empty = ExperimentPlan { etas: vec![], ..ok.clone() };
        assert!(matches!(empty.validate(), Err(HarnessError::Validation(_))));
        let out_of_range = ExperimentPlan { etas: vec![0.3], ..ok.clone() };
        assert!(out_of_range.validate().is_err());
        let warm = ExperimentPlan { warmup_years: 2, ..ok };
        assert!(warm.validate().is_err());
    }

    #[test]
    fn full_factorial_size() {
        let p = ExperimentPlan::full_factorial();
        assert_eq!(p.scenarios.len(), 162);
        assert_eq!((p.alphas.len(), p.etas.len(), p.replications, p.years), (11, 26, 10, 4));
        let ids: std::collections::BTreeSet<_> = p.scenarios.iter().map(|s| s.scenario_id()).collect();
        assert_eq!(ids.len(), 162);
    }
}
