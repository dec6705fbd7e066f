//! Summary tables built from a results table.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;

use crate::analysis::{optimal_eta, regress_alpha, RegressionResult};
use crate::error::HarnessError;
use crate::experiment::RunResult;

/// Optimum of one (scenario, alpha) cell.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimumRow {
    pub scenario_id: String,
    pub alpha: f64,
    pub rho: f64,
    pub cap_cost_level: String,
    pub bo_cost_level: String,
    pub eta_opt: f64,
    pub cost_opt: f64,
    /// Relative to the baseline at the same alpha; empty when the baseline lacks that alpha.
    pub delta_pct: Option<f64>,
}

/// Mean optimum over all scenarios sharing one level of one factor.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityRow {
    pub factor: String,
    pub level: String,
    pub cells: usize,
    pub mean_eta_opt: f64,
    pub mean_cost_opt: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegressionRow {
    pub scenario_id: String,
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub r: f64,
    pub r_undefined: bool,
    pub change_pct: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub baseline: String,
    pub optima: Vec<OptimumRow>,
    pub sensitivity: Vec<SensitivityRow>,
    pub regressions: Vec<RegressionRow>,
}

pub fn delta_pct(cost: f64, baseline: f64) -> f64 {
    100.0 * (cost - baseline) / baseline
}

fn key(alpha: f64) -> u64 {
    alpha.to_bits()
}

pub fn emit_report(rows: &[RunResult], baseline: &str) -> Result<Report, HarnessError> {
    if !rows.iter().any(|r| r.scenario_id == baseline) {
        return Err(HarnessError::MissingBaseline(baseline.to_string()));
    }
    let mut cells: BTreeMap<(String, u64), Vec<RunResult>> = BTreeMap::new();
    for r in rows {
        cells.entry((r.scenario_id.clone(), key(r.alpha))).or_default().push(r.clone());
    }
    let mut base_cost: BTreeMap<u64, f64> = BTreeMap::new();
    let mut optima = Vec::new();
    for ((id, _), group) in &cells {
        let (eta_opt, cost_opt) = optimal_eta(group).expect("groups are non-empty");
        let first = &group[0];
        if id == baseline {
            base_cost.insert(key(first.alpha), cost_opt);
        }
        optima.push(OptimumRow {
            scenario_id: id.clone(),
            alpha: first.alpha,
            rho: first.rho,
            cap_cost_level: first.cap_cost_level.as_str().to_string(),
            bo_cost_level: first.bo_cost_level.as_str().to_string(),
            eta_opt,
            cost_opt,
            delta_pct: None,
        });
    }
    for o in &mut optima {
        o.delta_pct = base_cost.get(&key(o.alpha)).map(|&b| delta_pct(o.cost_opt, b));
    }
    optima.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id).then(a.alpha.total_cmp(&b.alpha)));

    let sensitivity = sensitivity(&optima);

    let mut by_scenario: BTreeMap<&str, Vec<(f64, f64)>> = BTreeMap::new();
    for o in &optima {
        by_scenario.entry(&o.scenario_id).or_default().push((o.alpha, o.eta_opt));
    }
    let mut regressions = Vec::new();
    for (id, pts) in by_scenario {
        if let Ok(RegressionResult { slope, intercept, r, r_undefined, change_pct }) = regress_alpha(&pts) {
            regressions.push(RegressionRow {
                scenario_id: id.to_string(),
                points: pts.len(),
                slope,
                intercept,
                r,
                r_undefined,
                change_pct,
            });
        }
    }
    Ok(Report { baseline: baseline.to_string(), optima, sensitivity, regressions })
}

fn sensitivity(optima: &[OptimumRow]) -> Vec<SensitivityRow> {
    let mut acc: BTreeMap<(&str, String), (usize, f64, f64)> = BTreeMap::new();
    for o in optima {
        let levels = [
            ("rho", format!("{}", o.rho)),
            ("cap_cost", o.cap_cost_level.clone()),
            ("bo_cost", o.bo_cost_level.clone()),
        ];
        for (factor, level) in levels {
            let e = acc.entry((factor, level)).or_insert((0, 0.0, 0.0));
            e.0 += 1;
            e.1 += o.eta_opt;
            e.2 += o.cost_opt;
        }
    }
    acc.into_iter()
        .map(|((factor, level), (n, eta, cost))| SensitivityRow {
            factor: factor.to_string(),
            level,
            cells: n,
            mean_eta_opt: eta / n as f64,
            mean_cost_opt: cost / n as f64,
        })
        .collect()
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

impl Report {
    /// Writes `optima.csv`, `sensitivity.csv`, `regression.csv` and `report.txt`.
    pub fn write_to(&self, dir: impl AsRef<Path>) -> Result<(), HarnessError> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        write_csv(&dir.join("optima.csv"), &self.optima)?;
        write_csv(&dir.join("sensitivity.csv"), &self.sensitivity)?;
        write_csv(&dir.join("regression.csv"), &self.regressions)?;
        std::fs::write(dir.join("report.txt"), self.render_text())?;
        Ok(())
    }

    pub fn render_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "Optimal planned utilization (baseline {})", self.baseline);
        let _ = writeln!(s, "{:<24} {:>6} {:>7} {:>12} {:>9}", "scenario", "alpha", "eta*", "cost*", "delta%");
        for o in &self.optima {
            let d = o.delta_pct.map_or("-".to_string(), |d| format!("{d:+.2}"));
            let _ = writeln!(
                s,
                "{:<24} {:>6.2} {:>7.2} {:>12.2} {:>9}",
                o.scenario_id, o.alpha, o.eta_opt, o.cost_opt, d
            );
        }
        let _ = writeln!(s, "\nSensitivity");
        let _ = writeln!(s, "{:<10} {:<8} {:>6} {:>7} {:>12}", "factor", "level", "cells", "eta*", "cost*");
        for r in &self.sensitivity {
            let _ = writeln!(
                s,
                "{:<10} {:<8} {:>6} {:>7.3} {:>12.2}",
                r.factor, r.level, r.cells, r.mean_eta_opt, r.mean_cost_opt
            );
        }
        let _ = writeln!(s, "\nRegression of eta* on alpha");
        let _ = writeln!(s, "{:<24} {:>7} {:>9} {:>9} {:>7} {:>9}", "scenario", "points", "beta", "const", "R", "change%");
        for r in &self.regressions {
            let rr = if r.r_undefined { "n/a".to_string() } else { format!("{:.3}", r.r) };
            let _ = writeln!(
                s,
                "{:<24} {:>7} {:>9.3} {:>9.3} {:>7} {:>9.2}",
                r.scenario_id, r.points, r.slope, r.intercept, rr, r.change_pct
            );
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use etaplan_core::scenario::{DemandPattern, Level, StructureKind};

    fn row(id: &str, rho: f64, alpha: f64, eta: f64, rep: u32, cost: f64) -> RunResult {
        RunResult {
            scenario_id: id.into(),
            structure: StructureKind::FlowMany,
            pattern: DemandPattern::Constant,
            rho,
            cap_cost_level: Level::Med,
            bo_cost_level: Level::Med,
            alpha,
            eta,
            rep,
            seed: 1,
            cost_total: cost,
            cost_internal: cost,
            cost_external: 0.0,
            cost_holding: 0.0,
            cost_backorder: 0.0,
            service_level: 1.0,
            util_m1: 0.0,
            util_m2: 0.0,
            util_m3: 0.0,
            util_m4: 0.0,
            util_m5: 0.0,
            util_m6: 0.0,
        }
    }

    #[test]
    fn delta_against_baseline() {
        assert!((delta_pct(14_590.0, 13_637.0) - 6.99).abs() < 0.005);
        let rows = vec![
            row("f_m_c", 2.5, 0.0, 0.9, 0, 13_637.0),
            row("f_m_c", 2.5, 0.0, 1.0, 0, 14_000.0),
            row("f_m_s", 2.5, 0.0, 0.9, 0, 14_590.0),
        ];
        let rep = emit_report(&rows, "f_m_c").unwrap();
        assert_eq!(rep.optima[0].delta_pct, Some(0.0));
        assert!((rep.optima[1].delta_pct.unwrap() - 6.99).abs() < 0.005);
        assert!(matches!(emit_report(&rows, "j_m_c"), Err(HarnessError::MissingBaseline(_))));
    }

    #[test]
    fn sensitivity_replays_means() {
        let rows = vec![
            row("a", 2.2, 0.0, 0.8, 0, 10.0),
            row("a", 2.2, 0.0, 0.8, 1, 20.0),
            row("b", 2.5, 0.0, 0.9, 0, 30.0),
            row("c", 2.5, 0.0, 0.7, 0, 50.0),
        ];
        let rep = emit_report(&rows, "a").unwrap();
        let get = |f: &str, l: &str| rep.sensitivity.iter().find(|r| r.factor == f && r.level == l).unwrap().clone();
        let r22 = get("rho", "2.2");
        assert_eq!((r22.cells, r22.mean_eta_opt, r22.mean_cost_opt), (1, 0.8, 15.0));
        let r25 = get("rho", "2.5");
        assert_eq!(r25.cells, 2);
        assert!((r25.mean_eta_opt - 0.8).abs() < 1e-12);
        assert_eq!(r25.mean_cost_opt, 40.0);
        assert_eq!(get("cap_cost", "med").cells, 3);
    }

    #[test]
    fn row_order_does_not_matter() {
        let mut rows = Vec::new();
        for (i, a) in [0.0, 0.25, 0.5].into_iter().enumerate() {
            for (k, e) in [0.7, 0.8, 0.9].into_iter().enumerate() {
                rows.push(row("f_m_c", 2.5, a, e, 0, 100.0 + ((k as f64) - 2.0 + i as f64).powi(2)));
            }
        }
        let a = emit_report(&rows, "f_m_c").unwrap();
        rows.reverse();
        let b = emit_report(&rows, "f_m_c").unwrap();
        assert_eq!(a, b);
        assert_eq!(a.regressions.len(), 1);
        assert!(a.regressions[0].slope < 0.0);
        assert!(a.render_text().contains("f_m_c"));
    }
}
