//! Forecasts, forecast errors and the customer order stream.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Exp, LogNormal};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::scenario::{DemandPattern, MaterialId, NoiseMode, SeasonPhase, DAYS_PER_MONTH};

pub const MEAN_LEAD_TIME: f64 = 3.0;
pub const VAR_LEAD_TIME: f64 = 3.0;

/// Base monthly forecast: products 10, 12, 14, 16 form the 1000-piece group.
pub fn base_forecast(product: MaterialId) -> f64 {
    if product % 2 == 0 {
        1000.0
    } else {
        1500.0
    }
}

/// Forecast for a 1-based month; months past 12 wrap around the year.
pub fn forecast_value(pattern: DemandPattern, phase: SeasonPhase, product: MaterialId, month: u32) -> f64 {
    assert!(month >= 1, "months are 1-based");
    let base = base_forecast(product);
    match pattern {
        DemandPattern::Constant => base,
        DemandPattern::Seasonal => {
            let t = ((month - 1) % 12) as f64 + 1.0;
            let s = match phase {
                SeasonPhase::Prose => -(2.0 * PI * (t - 1.0) / 12.0).sin(),
                SeasonPhase::Table => (2.0 * PI * (t - 5.0) / 12.0).sin(),
            };
            // Snap sin() rounding noise so the quarter points are exact.
            let v = base + 0.5 * base * s;
            let r = v.round();
            if (v - r).abs() < 1e-9 {
                r
            } else {
                v
            }
        }
    }
}

/// Forecast error drawn from `N(0, (alpha F)^2)` truncated below at `-F`, by
/// inverse transform of a single uniform draw.
pub fn draw_forecast_error<R: Rng + ?Sized>(forecast: f64, alpha: f64, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    if alpha <= 0.0 || forecast <= 0.0 {
        return 0.0;
    }
    let sigma = alpha * forecast;
    let std = Normal::new(0.0, 1.0).expect("standard normal");
    let lo = std.cdf(-forecast / sigma);
    let p = lo + (1.0 - lo) * u;
    if p <= 0.0 {
        return -forecast;
    }
    (sigma * std.inverse_cdf(p)).max(-forecast)
}

pub fn order_rate(demand: f64, mean_amount: f64) -> f64 {
    debug_assert!(mean_amount > 0.0);
    demand.max(0.0) / mean_amount
}

/// Mean and variance of the order amount of a product.
pub fn order_amount_moments(product: MaterialId) -> (f64, f64) {
    if product % 2 == 0 {
        (10.0, 2.25)
    } else {
        (15.0, 6.25)
    }
}

/// Lognormal distribution with the given mean and variance.
#[derive(Clone, Copy, Debug)]
pub struct MomentLogNormal {
    pub mean: f64,
    pub var: f64,
    dist: Option<LogNormal<f64>>,
}

impl MomentLogNormal {
    pub fn new(mean: f64, var: f64) -> Self {
        assert!(mean > 0.0 && var >= 0.0);
        let dist = (var > 0.0).then(|| {
            let s2 = (1.0 + var / (mean * mean)).ln();
            LogNormal::new(mean.ln() - 0.5 * s2, s2.sqrt()).expect("valid lognormal")
        });
        Self { mean, var, dist }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.dist {
            Some(d) => d.sample(rng),
            None => self.mean,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CustomerOrder {
    pub id: usize,
    pub product: MaterialId,
    pub amount: u32,
    pub arrival: f64,
    pub due: f64,
    pub delivered: Option<f64>,
}

impl CustomerOrder {
    pub fn is_on_time(&self) -> bool {
        self.delivered.is_some_and(|d| d <= self.due + 1e-9)
    }
}

/// Draws one month of orders for one product. `ids` start at `first_id`.
#[allow(clippy::too_many_arguments)]
pub fn generate_month_orders<R: Rng + ?Sized>(
    product: MaterialId,
    month: u32,
    rate: f64,
    amount: &MomentLogNormal,
    lead: &MomentLogNormal,
    noise: NoiseMode,
    first_id: usize,
    rng: &mut R,
) -> Vec<CustomerOrder> {
    let days = DAYS_PER_MONTH as f64;
    let start = month as f64 * days;
    let mut offsets = Vec::new();
    match noise {
        NoiseMode::Stochastic => {
            if rate > 0.0 {
                let exp = Exp::new(rate / days).expect("positive rate");
                let mut t = exp.sample(rng);
                while t < days {
                    offsets.push(t);
                    t += exp.sample(rng);
                }
            }
        }
        NoiseMode::Degenerate => {
            let n = rate.round() as usize;
            offsets.extend((0..n).map(|k| (k as f64 + 0.5) * days / n as f64));
        }
    }
    offsets
        .into_iter()
        .enumerate()
        .map(|(k, off)| {
            let (amt, l) = match noise {
                NoiseMode::Stochastic => (amount.sample(rng), lead.sample(rng)),
                NoiseMode::Degenerate => (amount.mean, lead.mean),
            };
            let arrival = start + off;
            CustomerOrder {
                id: first_id + k,
                product,
                amount: (amt.round() as u32).max(1),
                arrival,
                due: arrival + l,
                delivered: None,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn constant_and_seasonal_forecast() {
        let c = DemandPattern::Constant;
        let s = DemandPattern::Seasonal;
        let ph = SeasonPhase::Prose;
        assert_eq!(forecast_value(c, ph, 10, 7), 1000.0);
        assert_eq!(forecast_value(c, ph, 11, 7), 1500.0);
        assert_eq!(forecast_value(s, ph, 10, 4), 500.0);
        assert_eq!(forecast_value(s, ph, 10, 10), 1500.0);
        assert_eq!(forecast_value(s, ph, 11, 1), 1500.0);
        assert_eq!(forecast_value(s, ph, 10, 13), forecast_value(s, ph, 10, 1));
        // The table phase peaks in month 8.
        assert_eq!(forecast_value(s, SeasonPhase::Table, 10, 8), 1500.0);
        assert_eq!(forecast_value(s, SeasonPhase::Table, 10, 2), 500.0);
    }

    #[test]
    fn zero_alpha_means_no_error() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(draw_forecast_error(1000.0, 0.0, &mut rng), 0.0);
    }

    #[test]
    fn truncation_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100_000 {
            assert!(draw_forecast_error(1000.0, 0.5, &mut rng) >= -1000.0);
        }
    }

    #[test]
    fn order_rate_examples() {
        assert_eq!(order_rate(1000.0 + 200.0, 10.0), 120.0);
        assert_eq!(order_rate(1000.0, 10.0), 100.0);
        assert_eq!(order_rate(0.0, 10.0), 0.0);
    }

    #[test]
    fn lognormal_moments() {
        let d = MomentLogNormal::new(10.0, 2.25);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 200_000;
        let xs: Vec<f64> = (0..n).map(|_| d.sample(&mut rng)).collect();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!((mean - 10.0).abs() < 0.02, "{mean}");
        assert!((var - 2.25).abs() < 0.05, "{var}");
    }

    #[test]
    fn degenerate_month() {
        let amount = MomentLogNormal::new(10.0, 2.25);
        let lead = MomentLogNormal::new(3.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let orders = generate_month_orders(10, 2, 100.0, &amount, &lead, NoiseMode::Degenerate, 7, &mut rng);
        assert_eq!(orders.len(), 100);
        assert_eq!(orders[0].id, 7);
        for o in &orders {
            assert_eq!(o.amount, 10);
            assert!((o.due - o.arrival - 3.0).abs() < 1e-12);
            assert!(o.arrival >= 56.0 && o.arrival < 84.0);
        }
        assert!(generate_month_orders(10, 0, 0.0, &amount, &lead, NoiseMode::Stochastic, 0, &mut rng).is_empty());
    }
}
