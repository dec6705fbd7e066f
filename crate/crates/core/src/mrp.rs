//! Master production schedule and material requirements planning.
//!
//! All day-indexed vectors here start at "today": index 0 is the planning
//! day, index `k` is `today + k`.

use std::collections::BTreeMap;

use crate::scenario::{Calendar, MaterialId, MaterialKind, Structure};

pub const PLANNED_LEAD_TIME: u32 = 2;
pub const MRP_HORIZON: usize = 30;
pub const MPS_HORIZON: usize = 60;

#[derive(Clone, Debug, PartialEq)]
pub struct MrpParams {
    pub lead_time: u32,
    pub mrp_horizon: usize,
    pub mps_horizon: usize,
    /// Safety stock per material; absent means zero.
    pub safety_stock: BTreeMap<MaterialId, i64>,
    /// When set, due dates move back to working days and lead times count
    /// working days only. Otherwise plain calendar days are used.
    pub shop_calendar: Option<Calendar>,
}

impl Default for MrpParams {
    fn default() -> Self {
        Self {
            lead_time: PLANNED_LEAD_TIME,
            mrp_horizon: MRP_HORIZON,
            mps_horizon: MPS_HORIZON,
            safety_stock: BTreeMap::new(),
            shop_calendar: None,
        }
    }
}

impl MrpParams {
    pub fn safety_stock_of(&self, id: MaterialId) -> i64 {
        self.safety_stock.get(&id).copied().unwrap_or(0)
    }

    /// Planned `(start, due)` for a requirement on `day`, before fencing.
    pub fn offset(&self, day: u32) -> (u32, u32) {
        match &self.shop_calendar {
            None => (day.saturating_sub(self.lead_time), day),
            Some(cal) => {
                let back = |mut d: u32| {
                    while d > 0 && !cal.is_working_day(d) {
                        d -= 1;
                    }
                    d
                };
                let due = back(day);
                let mut start = due;
                for _ in 0..self.lead_time {
                    start = back(start.saturating_sub(1));
                }
                (start, due)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MpsLine {
    pub product: MaterialId,
    pub day: u32,
    pub quantity: i64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderState {
    Planned,
    Released,
    InProcess { operation: usize },
    Finished,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProductionOrder {
    pub id: usize,
    pub material: MaterialId,
    pub quantity: i64,
    pub start: u32,
    pub due: u32,
    pub state: OrderState,
}

/// Splits one monthly quantity evenly over the working days, earliest days
/// taking one extra piece each until the remainder is used up.
pub fn disaggregate_month(quantity: i64, working_days: u32) -> Vec<i64> {
    let n = working_days as i64;
    let q = quantity.max(0);
    let (base, rem) = (q / n, q % n);
    (0..n).map(|k| base + i64::from(k < rem)).collect()
}

/// Daily program over consecutive months starting at `first_month`,
/// indexed by absolute day minus `first_month * days_per_month`.
pub fn disaggregate_program(monthly: &[f64], calendar: &Calendar) -> Vec<i64> {
    let dpm = calendar.days_per_month as usize;
    let mut out = vec![0; monthly.len() * dpm];
    for (t, &x) in monthly.iter().enumerate() {
        let daily = disaggregate_month(x.round() as i64, calendar.working_days_per_month);
        for (k, q) in daily.into_iter().enumerate() {
            out[t * dpm + calendar.working_day_offset(k as u32) as usize] = q;
        }
    }
    out
}

fn cumulate(v: &[i64]) -> Vec<i64> {
    v.iter()
        .scan(0i64, |acc, &x| {
            *acc += x;
            Some(*acc)
        })
        .collect()
}

/// Daily MPS quantities from the cumulative maximum of demand and of
/// program plus the inventory target. `demand[k]` is the amount of open
/// orders due on day `k` (backlog already folded into day 0).
pub fn compute_mps(program: &[i64], demand: &[i64], target: i64) -> Vec<i64> {
    let n = program.len().max(demand.len());
    let pad = |v: &[i64]| {
        let mut w = v.to_vec();
        w.resize(n, 0);
        w
    };
    let (cp, cd) = (cumulate(&pad(program)), cumulate(&pad(demand)));
    let mut prev = 0;
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let cum = cd[k].max(cp[k] + target).max(prev);
        out.push(cum - prev);
        prev = cum;
    }
    out
}

pub fn mps_lines(product: MaterialId, today: u32, daily: &[i64]) -> Vec<MpsLine> {
    daily
        .iter()
        .enumerate()
        .map(|(k, &q)| MpsLine { product, day: today + k as u32, quantity: q })
        .collect()
}

/// Net requirements per day. Projected availability starts at
/// `on_hand - safety_stock`; any shortfall is covered on the day it appears.
pub fn net_requirements(gross: &[i64], on_hand: i64, receipts: &[i64], safety_stock: i64) -> Vec<i64> {
    let n = gross.len().max(receipts.len());
    let mut pa = on_hand - safety_stock;
    let mut net = vec![0; n];
    for k in 0..n {
        pa += receipts.get(k).copied().unwrap_or(0) - gross.get(k).copied().unwrap_or(0);
        if pa < 0 {
            net[k] = -pa;
            pa = 0;
        }
    }
    net
}

/// Inputs of one MRP run.
#[derive(Clone, Debug)]
pub struct MrpState<'a> {
    pub today: u32,
    /// Daily MPS per finished product, from today.
    pub mps: &'a BTreeMap<MaterialId, Vec<i64>>,
    pub on_hand: &'a BTreeMap<MaterialId, i64>,
    /// Firm orders not yet finished. Planned ones still need their
    /// components; later states have consumed them.
    pub open_orders: &'a [ProductionOrder],
}

/// Nets, sizes lot-for-lot, offsets by the lead time and explodes the bill
/// of material level by level. Returns new planned orders numbered from
/// `next_id`; orders whose start falls before today start today.
pub fn run_mrp(structure: &Structure, params: &MrpParams, state: &MrpState<'_>, next_id: usize) -> Vec<ProductionOrder> {
    let h = params.mrp_horizon;
    let today = state.today;
    let idx = |day: u32| day.saturating_sub(today) as usize;
    let mut gross: BTreeMap<MaterialId, Vec<i64>> = BTreeMap::new();
    for (&p, daily) in state.mps {
        let mut g = vec![0; h];
        for (k, &q) in daily.iter().take(h).enumerate() {
            g[k] = q;
        }
        gross.insert(p, g);
    }
    let mut receipts: BTreeMap<MaterialId, Vec<i64>> = BTreeMap::new();
    for o in state.open_orders.iter().filter(|o| o.state != OrderState::Finished) {
        let r = receipts.entry(o.material).or_insert_with(|| vec![0; h]);
        if idx(o.due) < h {
            r[idx(o.due)] += o.quantity;
        }
        if o.state == OrderState::Planned {
            for &(c, q) in &structure.material(o.material).components {
                let g = gross.entry(c).or_insert_with(|| vec![0; h]);
                if idx(o.start) < h {
                    g[idx(o.start)] += o.quantity * q as i64;
                }
            }
        }
    }

    let mut orders = Vec::new();
    for i in structure.low_level_order() {
        let m = &structure.materials[i];
        if m.kind == MaterialKind::Raw {
            continue;
        }
        let Some(g) = gross.get(&m.id).cloned() else { continue };
        let r = receipts.get(&m.id).cloned().unwrap_or_default();
        let on_hand = state.on_hand.get(&m.id).copied().unwrap_or(0);
        let net = net_requirements(&g, on_hand, &r, params.safety_stock_of(m.id));
        for (k, &q) in net.iter().enumerate() {
            if q <= 0 {
                continue;
            }
            let (start, due) = params.offset(today + k as u32);
            let (start, due) = (start.max(today), due.max(today));
            for &(c, per) in &m.components {
                let cg = gross.entry(c).or_insert_with(|| vec![0; h]);
                cg[idx(start)] += q * per as i64;
            }
            orders.push(ProductionOrder {
                id: next_id + orders.len(),
                material: m.id,
                quantity: q,
                start,
                due,
                state: OrderState::Planned,
            });
        }
    }
    orders
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{build_structure, Material, StructureKind};

    #[test]
    fn disaggregation() {
        assert_eq!(disaggregate_month(400, 20), vec![20; 20]);
        let d = disaggregate_month(410, 20);
        assert!(d[..10].iter().all(|&q| q == 21) && d[10..].iter().all(|&q| q == 20));
        assert_eq!(disaggregate_month(0, 20), vec![0; 20]);
        let cal = Calendar::default();
        let p = disaggregate_program(&[400.0, 0.0], &cal);
        assert_eq!(p.len(), 56);
        assert_eq!(p[0], 20);
        assert_eq!(p[5], 0);
        assert_eq!(p[7], 20);
        assert_eq!(p.iter().sum::<i64>(), 400);
    }

    #[test]
    fn mps_cumulative_max() {
        // cumDemand (10, 25, 30), cumProgram (12, 20, 35).
        assert_eq!(compute_mps(&[12, 8, 15], &[10, 15, 5], 0), vec![12, 13, 10]);
        assert_eq!(compute_mps(&[5, 5, 5], &[0, 0, 0], 0), vec![5, 5, 5]);
        assert_eq!(compute_mps(&[1, 1, 1], &[4, 4, 4], 0), vec![4, 4, 4]);
        assert_eq!(compute_mps(&[5, 5], &[], 30), vec![35, 5]);
    }

    #[test]
    fn netting() {
        let mut g = vec![0; 6];
        g[5] = 100;
        assert_eq!(net_requirements(&g, 30, &[], 10)[5], 80);
        assert_eq!(net_requirements(&g, 500, &[], 0), vec![0; 6]);
        let mut r = vec![0; 6];
        r[3] = 50;
        assert_eq!(net_requirements(&g, 30, &r, 0)[5], 20);
    }

    fn chain() -> Structure {
        let m = |id, kind, c: Option<MaterialId>| Material {
            id,
            kind,
            components: c.map(|c| vec![(c, 1)]).unwrap_or_default(),
            routing: if kind == MaterialKind::Raw { vec![] } else { vec![0] },
        };
        let mut s = build_structure(StructureKind::FlowLow);
        s.materials = vec![
            m(10, MaterialKind::Finished, Some(20)),
            m(20, MaterialKind::Sub, Some(30)),
            m(30, MaterialKind::Sub, Some(100)),
            m(100, MaterialKind::Raw, None),
        ];
        s
    }

    #[test]
    fn explosion_down_a_chain() {
        let s = chain();
        let mut mps = BTreeMap::new();
        let mut d = vec![0; 31];
        d[30] = 80;
        mps.insert(10, d);
        let on_hand = BTreeMap::new();
        let params = MrpParams { mrp_horizon: 31, ..MrpParams::default() };
        let st = MrpState { today: 0, mps: &mps, on_hand: &on_hand, open_orders: &[] };
        let orders = run_mrp(&s, &params, &st, 1);
        let key: Vec<_> = orders.iter().map(|o| (o.material, o.quantity, o.start, o.due)).collect();
        assert_eq!(key, vec![(10, 80, 28, 30), (20, 80, 26, 28), (30, 80, 24, 26)]);
        assert_eq!(orders.iter().map(|o| o.id).collect::<Vec<_>>(), vec![1, 2, 3]);
    }

    #[test]
    fn fence_compresses_lead_time() {
        let s = chain();
        let mut mps = BTreeMap::new();
        mps.insert(10, vec![0, 5, 0]);
        let on_hand = BTreeMap::new();
        let st = MrpState { today: 10, mps: &mps, on_hand: &on_hand, open_orders: &[] };
        let orders = run_mrp(&s, &MrpParams::default(), &st, 0);
        assert_eq!((orders[0].start, orders[0].due), (10, 11));
        assert!(orders.iter().all(|o| o.start == 10));
    }

    #[test]
    fn shop_calendar_skips_weekends() {
        let params = MrpParams { shop_calendar: Some(Calendar::default()), ..MrpParams::default() };
        // Day 7 is a Monday: start the Thursday before.
        assert_eq!(params.offset(7), (3, 7));
        // Day 13 is a Sunday: due moves to Friday 11, start Wednesday 9.
        assert_eq!(params.offset(13), (9, 11));
        assert_eq!(MrpParams::default().offset(7), (5, 7));
    }

    #[test]
    fn rerun_with_firm_orders_adds_nothing() {
        let s = build_structure(StructureKind::FlowMany);
        let mut mps = BTreeMap::new();
        for p in s.finished() {
            mps.insert(p, (0..30).map(|k| (k % 7) as i64 * 3).collect());
        }
        let on_hand: BTreeMap<_, _> = [(10, 7), (20, 3)].into_iter().collect();
        let params = MrpParams::default();
        let st = MrpState { today: 4, mps: &mps, on_hand: &on_hand, open_orders: &[] };
        let first = run_mrp(&s, &params, &st, 0);
        assert!(!first.is_empty());
        let st2 = MrpState { open_orders: &first, ..st };
        assert!(run_mrp(&s, &params, &st2, first.len()).is_empty());
    }
}
