use etaplan_core::app::audit_solution;
use etaplan_core::scenario::{ExternalPolicyKind, NoiseMode, ScenarioConfig, StructureKind};
use etaplan_core::sim::{simulate_config, write_trace_csv, SimOptions};

fn traced() -> SimOptions {
    SimOptions { trace: true, check_invariants: true }
}

fn csv(cfg: &ScenarioConfig, seed: u64) -> (Vec<u8>, u64) {
    let out = simulate_config(cfg, seed, &traced()).unwrap();
    let mut buf = Vec::new();
    write_trace_csv(&mut buf, &out.trace).unwrap();
    (buf, out.invariant_checks)
}

#[test]
fn same_seed_same_trace() {
    let mut cfg = ScenarioConfig::basic();
    cfg.alpha = 0.3;
    cfg.eta = 0.86;
    let (a, checks) = csv(&cfg, 99);
    let (b, _) = csv(&cfg, 99);
    assert!(checks > 10_000);
    assert_eq!(a, b);
    let (c, _) = csv(&cfg, 100);
    assert_ne!(a, c);
}

#[test]
fn conservation_holds_on_every_structure() {
    for structure in StructureKind::ALL {
        let mut cfg = ScenarioConfig::basic();
        cfg.structure = structure;
        cfg.alpha = 0.2;
        cfg.eta = 0.8;
        cfg.external_policy = ExternalPolicyKind::NegativeSlack;
        let out = simulate_config(&cfg, 7, &SimOptions { trace: false, check_invariants: true }).unwrap();
        assert!(out.invariant_checks > 0, "{structure}");
        assert!(out.report.service_level > 0.0 && out.report.service_level <= 1.0);
    }
}

#[test]
fn deterministic_mode_is_on_time() {
    let mut cfg = ScenarioConfig::basic();
    cfg.noise = NoiseMode::Degenerate;
    cfg.eta = 0.98;
    let out = simulate_config(&cfg, 1, &SimOptions::default()).unwrap();
    assert_eq!(out.report.service_level, 1.0);
    assert_eq!(out.report.cost_backorder(), 0.0);
}

#[test]
fn plans_satisfy_the_model() {
    let mut cfg = ScenarioConfig::basic();
    cfg.alpha = 0.25;
    cfg.eta = 0.84;
    let out = simulate_config(&cfg, 3, &SimOptions::default()).unwrap();
    // Replans at months 0, 4 and 8 of each of the two years.
    assert_eq!(out.plans.len(), 6);
    for p in &out.plans {
        let bad = audit_solution(&p.input, &p.solution, 1e-6);
        assert!(bad.is_empty(), "day {}: {bad:?}", p.day);
    }
}

#[test]
fn low_eta_buys_capacity_high_eta_pays_backorders() {
    let run = |eta| {
        let mut cfg = ScenarioConfig::basic();
        cfg.alpha = 0.25;
        cfg.eta = eta;
        simulate_config(&cfg, 11, &SimOptions::default()).unwrap().report
    };
    let (lo, hi) = (run(0.5), run(1.0));
    assert!(lo.cost_internal() + lo.cost_external() >= hi.cost_internal() + hi.cost_external());
    assert!(hi.cost_backorder() >= lo.cost_backorder());
    assert!(hi.service_level < lo.service_level);
}
