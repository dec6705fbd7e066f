//! Cost accrual and run-level KPIs.

use serde::{Deserialize, Serialize};

use crate::demand::CustomerOrder;
use crate::scenario::{BackorderBasis, NUM_MACHINES};

/// The evaluated part of a run, in days.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvalWindow {
    pub start: f64,
    pub end: f64,
}

impl EvalWindow {
    pub fn new(start: f64, end: f64) -> Self {
        assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> f64 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.len() <= 0.0
    }

    /// Length of `[a, b]` inside the window.
    pub fn overlap(&self, a: f64, b: f64) -> f64 {
        (b.min(self.end) - a.max(self.start)).max(0.0)
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start && t <= self.end
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CostLedger {
    pub internal: f64,
    pub external: f64,
    pub holding: f64,
    pub backorder: f64,
    /// Backorder accrued by orders still open when the run ends.
    pub end_penalty: f64,
}

impl CostLedger {
    pub fn total(&self) -> f64 {
        self.internal + self.external + self.holding + self.backorder + self.end_penalty
    }

    /// `value_rate` is the sum of stock times holding rate, per day.
    pub fn accrue_holding(&mut self, window: &EvalWindow, value_rate: f64, from: f64, to: f64) {
        self.holding += value_rate * window.overlap(from, to);
    }

    /// Shift hours of one machine on one working day starting at `day`.
    pub fn accrue_internal(&mut self, window: &EvalWindow, hours: f64, rate: f64, day: f64) {
        if day >= window.start && day < window.end {
            self.internal += hours * rate;
        }
    }

    pub fn accrue_external(&mut self, window: &EvalWindow, hours: f64, rate: f64, at: f64) {
        if at >= window.start && at < window.end {
            self.external += hours * rate;
        }
    }

    /// Books the lateness of one order up to delivery or to the window end.
    pub fn accrue_backorder(&mut self, window: &EvalWindow, order: &CustomerOrder, basis: BackorderBasis, rate: f64) {
        let weight = match basis {
            BackorderBasis::Piece => order.amount as f64,
            BackorderBasis::Order => 1.0,
        };
        match order.delivered {
            Some(d) => self.backorder += weight * rate * window.overlap(order.due, d),
            None => self.end_penalty += weight * rate * window.overlap(order.due, window.end),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KpiReport {
    pub ledger: CostLedger,
    /// Length of the evaluation window in days.
    pub days: f64,
    pub service_level: f64,
    pub utilization: [f64; NUM_MACHINES],
    pub orders: usize,
    pub late_orders: usize,
}

impl KpiReport {
    pub fn per_day(&self, amount: f64) -> f64 {
        if self.days > 0.0 {
            amount / self.days
        } else {
            0.0
        }
    }

    pub fn cost_total(&self) -> f64 {
        self.per_day(self.ledger.total())
    }
    pub fn cost_internal(&self) -> f64 {
        self.per_day(self.ledger.internal)
    }
    pub fn cost_external(&self) -> f64 {
        self.per_day(self.ledger.external)
    }
    pub fn cost_holding(&self) -> f64 {
        self.per_day(self.ledger.holding)
    }
    /// Includes the end-of-run penalty.
    pub fn cost_backorder(&self) -> f64 {
        self.per_day(self.ledger.backorder + self.ledger.end_penalty)
    }
}

/// Closes a run: books backorders and counts orders due inside the window.
pub fn finalize_run(
    mut ledger: CostLedger,
    window: &EvalWindow,
    orders: &[CustomerOrder],
    basis: BackorderBasis,
    backorder_rate: f64,
    busy_hours: &[f64; NUM_MACHINES],
    available_hours: &[f64; NUM_MACHINES],
) -> KpiReport {
    let mut due = 0;
    let mut late = 0;
    for o in orders {
        ledger.accrue_backorder(window, o, basis, backorder_rate);
        if window.contains(o.due) {
            due += 1;
            if !o.is_on_time() {
                late += 1;
            }
        }
    }
    let mut utilization = [0.0; NUM_MACHINES];
    for j in 0..NUM_MACHINES {
        if available_hours[j] > 0.0 {
            utilization[j] = busy_hours[j] / available_hours[j];
        }
    }
    KpiReport {
        ledger,
        days: window.len(),
        service_level: if due == 0 { 1.0 } else { (due - late) as f64 / due as f64 },
        utilization,
        orders: due,
        late_orders: late,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(id: usize, amount: u32, due: f64, delivered: Option<f64>) -> CustomerOrder {
        CustomerOrder { id, product: 10, amount, arrival: due - 3.0, due, delivered }
    }

    #[test]
    fn accrual_examples() {
        let w = EvalWindow::new(0.0, 100.0);
        let mut l = CostLedger::default();
        l.accrue_holding(&w, 50.0 * 1.0, 10.0, 12.0);
        assert_eq!(l.holding, 100.0);
        l.accrue_backorder(&w, &order(0, 10, 5.0, Some(8.0)), BackorderBasis::Piece, 19.0);
        assert_eq!(l.backorder, 570.0);
        l.accrue_internal(&w, 320.0, 100.0, 3.0);
        assert_eq!(l.internal, 32_000.0);
        assert_eq!(l.total(), 32_670.0);
    }

    #[test]
    fn synthetic_trace() {
        let w = EvalWindow::new(0.0, 50.0);
        let orders = [order(0, 5, 10.0, Some(10.0)), order(1, 5, 20.0, Some(22.0)), order(2, 5, 30.0, Some(29.0))];
        let r = finalize_run(CostLedger::default(), &w, &orders, BackorderBasis::Piece, 9.0, &[0.0; 6], &[1.0; 6]);
        assert_eq!(r.ledger.backorder, 90.0);
        assert!((r.service_level - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!((r.orders, r.late_orders), (3, 1));
    }

    #[test]
    fn warmup_and_open_orders() {
        let w = EvalWindow::new(10.0, 20.0);
        let mut l = CostLedger::default();
        l.accrue_holding(&w, 2.0, 0.0, 15.0);
        assert_eq!(l.holding, 10.0);
        l.accrue_internal(&w, 16.0, 100.0, 9.0);
        l.accrue_external(&w, 4.0, 200.0, 20.0);
        assert_eq!(l.internal + l.external, 0.0);
        let orders = [order(0, 2, 18.0, None), order(1, 1, 5.0, Some(12.0))];
        let r = finalize_run(l, &w, &orders, BackorderBasis::Piece, 1.0, &[0.0; 6], &[0.0; 6]);
        assert_eq!(r.ledger.end_penalty, 4.0);
        assert_eq!(r.ledger.backorder, 2.0);
        // Only the order due inside the window counts, and it is still open.
        assert_eq!((r.orders, r.late_orders), (1, 1));
        assert_eq!(r.cost_total(), 16.0 / 10.0);
    }

    #[test]
    fn empty_window_reports_full_service() {
        let w = EvalWindow::new(0.0, 10.0);
        let r = finalize_run(CostLedger::default(), &w, &[], BackorderBasis::Order, 1.0, &[0.0; 6], &[0.0; 6]);
        assert_eq!(r.service_level, 1.0);
        assert_eq!(r.ledger.total(), 0.0);
    }
}
