//! Optimal-eta selection and forecast-error regressions.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::HarnessError;
use crate::experiment::RunResult;

/// Mean total cost per eta level, in ascending eta.
pub fn mean_cost_by_eta(rows: &[RunResult]) -> Vec<(f64, f64)> {
    mean_by_eta(rows, |r| r.cost_total)
}

pub fn mean_by_eta(rows: &[RunResult], value: impl Fn(&RunResult) -> f64) -> Vec<(f64, f64)> {
    let mut acc: BTreeMap<u64, (f64, f64, usize)> = BTreeMap::new();
    for r in rows {
        // Sorting by bit pattern is monotone for the non-negative grid values.
        let e = acc.entry(r.eta.to_bits()).or_insert((r.eta, 0.0, 0));
        e.1 += value(r);
        e.2 += 1;
    }
    acc.into_values().map(|(eta, sum, n)| (eta, sum / n as f64)).collect()
}

/// Picks the eta with the lowest mean cost; ties go to the lower eta.
/// Returns `None` for an empty slice.
pub fn select_optimal_eta(curve: &[(f64, f64)]) -> Option<(f64, f64)> {
    let mut best: Option<(f64, f64)> = None;
    for &(eta, cost) in curve {
        best = match best {
            Some((be, bc)) if cost > bc || (cost == bc && eta >= be) => Some((be, bc)),
            _ => Some((eta, cost)),
        };
    }
    best
}

/// Optimal eta and mean cost of the rows of one (scenario, alpha) cell.
pub fn optimal_eta(rows: &[RunResult]) -> Option<(f64, f64)> {
    select_optimal_eta(&mean_cost_by_eta(rows))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RegressionResult {
    pub slope: f64,
    pub intercept: f64,
    /// Pearson correlation; 0 when `y` is constant.
    pub r: f64,
    /// Set when `y` has no variance and `r` is therefore undefined.
    pub r_undefined: bool,
    /// Relative change of the fitted line from alpha = 0 to alpha = 0.5, in percent.
    pub change_pct: f64,
}

/// Ordinary least squares of `y` on `alpha`.
pub fn regress_alpha(points: &[(f64, f64)]) -> Result<RegressionResult, HarnessError> {
    if points.len() < 3 {
        return Err(HarnessError::Validation(format!("regression needs 3 points, got {}", points.len())));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    let scale = points.iter().map(|p| p.0 * p.0).sum::<f64>().max(1.0);
    if sxx <= 1e-12 * scale {
        return Err(HarnessError::ZeroVariance);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_undefined = syy <= 1e-12 * points.iter().map(|p| p.1 * p.1).sum::<f64>().max(1.0);
    let r = if r_undefined { 0.0 } else { (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0) };
    let at0 = intercept;
    let at_half = intercept + 0.5 * slope;
    let change_pct = if at0 != 0.0 { 100.0 * (at_half - at0) / at0 } else { 0.0 };
    Ok(RegressionResult { slope, intercept, r, r_undefined, change_pct })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn selection() {
        let curve = [(0.82, 15_400.0), (0.84, 15_331.0), (0.86, 15_500.0)];
        assert_eq!(select_optimal_eta(&curve), Some((0.84, 15_331.0)));
        assert_eq!(select_optimal_eta(&[(0.7, 1.0)]), Some((0.7, 1.0)));
        assert_eq!(select_optimal_eta(&[(0.86, 5.0), (0.84, 5.0)]), Some((0.84, 5.0)));
        assert_eq!(select_optimal_eta(&[]), None);
    }

    #[test]
    fn selection_survives_rescaling() {
        let curve = [(0.5, 9.0), (0.6, 4.0), (0.7, 4.5), (0.8, 7.0)];
        let scaled: Vec<_> = curve.iter().map(|&(e, c)| (e, 3.5 * c)).collect();
        assert_eq!(select_optimal_eta(&curve).unwrap().0, select_optimal_eta(&scaled).unwrap().0);
    }

    #[test]
    fn regression_examples() {
        let r = regress_alpha(&[(0.0, 0.96), (0.25, 0.85), (0.5, 0.76)]).unwrap();
        assert!((r.slope + 0.4).abs() < 1e-12);
        assert!(r.r < -0.99 && r.r >= -1.0);

        let line = regress_alpha(&[(0.0, 1.0), (0.1, 1.2), (0.2, 1.4), (0.3, 1.6)]).unwrap();
        assert!((line.r - 1.0).abs() < 1e-12);
        assert!((line.change_pct - 100.0).abs() < 1e-9);

        let flat = regress_alpha(&[(0.0, 0.9), (0.1, 0.9), (0.2, 0.9)]).unwrap();
        assert_eq!((flat.slope, flat.r, flat.r_undefined), (0.0, 0.0, true));

        assert!(matches!(regress_alpha(&[(0.1, 1.0), (0.1, 2.0), (0.1, 3.0)]), Err(HarnessError::ZeroVariance)));
        assert!(regress_alpha(&[(0.0, 1.0), (0.1, 2.0)]).is_err());
    }
}
