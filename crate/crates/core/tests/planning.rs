use std::collections::BTreeMap;

use etaplan_core::mrp::{compute_mps, disaggregate_program, net_requirements, run_mrp, MrpParams, MrpState, OrderState};
use etaplan_core::scenario::{build_structure, Calendar, MaterialKind, StructureKind};
use proptest::prelude::*;

fn cum(v: &[i64]) -> Vec<i64> {
    let mut s = 0;
    v.iter().map(|&x| {
        s += x;
        s
    })
    .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn mps_dominates_demand_and_program(
        program in prop::collection::vec(0i64..60, 1..80),
        demand in prop::collection::vec(0i64..150, 1..80),
        target in -200i64..300,
    ) {
        let mps = compute_mps(&program, &demand, target);
        let n = program.len().max(demand.len());
        prop_assert_eq!(mps.len(), n);
        let mut p = program.clone();
        p.resize(n, 0);
        let mut d = demand.clone();
        d.resize(n, 0);
        let (cm, cp, cd) = (cum(&mps), cum(&p), cum(&d));
        for k in 0..n {
            prop_assert!(mps[k] >= 0);
            prop_assert!(cm[k] >= cd[k]);
            prop_assert!(cm[k] >= cp[k] + target);
        }
        for k in 0..n {
            let prev = if k == 0 { 0 } else { cm[k - 1] };
            prop_assert_eq!(cm[k], cd[k].max(cp[k] + target).max(prev));
        }
    }

    #[test]
    fn netting_covers_exactly(
        gross in prop::collection::vec(0i64..100, 1..40),
        receipts in prop::collection::vec(0i64..100, 0..40),
        on_hand in 0i64..300,
        ss in 0i64..150,
    ) {
        let net = net_requirements(&gross, on_hand, &receipts, ss);
        let n = gross.len().max(receipts.len());
        let pad = |v: &[i64]| { let mut w = v.to_vec(); w.resize(n, 0); w };
        let (cg, cr, cn) = (cum(&pad(&gross)), cum(&pad(&receipts)), cum(&net));
        let mut shortfall = 0;
        for k in 0..n {
            prop_assert!(net[k] >= 0);
            prop_assert!(on_hand - ss + cr[k] + cn[k] >= cg[k]);
            shortfall = shortfall.max(cg[k] - cr[k] - (on_hand - ss));
        }
        prop_assert_eq!(cn[n - 1], shortfall.max(0));
    }

    #[test]
    fn program_disaggregation_keeps_totals(months in prop::collection::vec(0.0f64..3000.0, 1..13)) {
        let cal = Calendar::default();
        let daily = disaggregate_program(&months, &cal);
        prop_assert_eq!(daily.len(), months.len() * cal.days_per_month as usize);
        for (t, &m) in months.iter().enumerate() {
            let span = &daily[t * 28..(t + 1) * 28];
            prop_assert_eq!(span.iter().sum::<i64>(), m.round() as i64);
            for (d, &q) in span.iter().enumerate() {
                if !cal.is_working_day(d as u32) {
                    prop_assert_eq!(q, 0);
                }
            }
        }
    }

    #[test]
    fn mrp_is_idempotent(
        seed_demand in prop::collection::vec(0i64..60, 30),
        stock in 0i64..200,
        kind in 0usize..3,
        today in 0u32..300,
    ) {
        let structure = build_structure(StructureKind::ALL[kind]);
        let mut mps = BTreeMap::new();
        for (i, p) in structure.finished().into_iter().enumerate() {
            let d: Vec<i64> = seed_demand.iter().map(|&q| (q * (i as i64 + 1)) % 70).collect();
            mps.insert(p, d);
        }
        let on_hand: BTreeMap<_, _> = structure
            .materials
            .iter()
            .filter(|m| m.kind != MaterialKind::Raw)
            .map(|m| (m.id, stock))
            .collect();
        let params = MrpParams::default();
        let first = run_mrp(&structure, &params, &MrpState { today, mps: &mps, on_hand: &on_hand, open_orders: &[] }, 0);
        prop_assert!(first.iter().all(|o| o.state == OrderState::Planned && o.quantity > 0 && o.start <= o.due));
        let again = run_mrp(&structure, &params, &MrpState { today, mps: &mps, on_hand: &on_hand, open_orders: &first }, first.len());
        prop_assert!(again.is_empty());
    }
}
