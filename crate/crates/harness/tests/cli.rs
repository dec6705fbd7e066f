use std::process::Command;

fn etaplan(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_etaplan")).args(args).output().unwrap()
}

#[test]
fn run_writes_csv_and_report_reads_it() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("rows.csv");
    let out = etaplan(&["run", "--eta", "0.9", "--alpha", "0.1", "--reps", "1", "--out", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 2);

    let tables = dir.path().join("tables");
    let out = etaplan(&["report", "--in", csv.to_str().unwrap(), "--out-dir", tables.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("f_m_c"));
    for f in ["optima.csv", "sensitivity.csv", "regression.csv", "report.txt"] {
        assert!(tables.join(f).exists(), "{f}");
    }

    let out = etaplan(&["report", "--in", csv.to_str().unwrap(), "--baseline", "j_m_s"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn invalid_input_exits_with_one() {
    assert_eq!(etaplan(&["run", "--eta", "1.02", "--reps", "1"]).status.code(), Some(1));
    assert_eq!(etaplan(&["sweep", "--eta-grid", "0.7,x", "--reps", "1"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"structure": "flow_many", "demand_pattern": "weekly"}"#).unwrap();
    let out = etaplan(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("demand_pattern"));
}

#[test]
fn config_file_drives_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.json");
    std::fs::write(
        &cfg,
        r#"{"structure": "flow_low", "demand_pattern": "seasonal", "rho": 2.2,
            "capacity_cost_level": "low", "backorder_cost_level": "high",
            "alpha": 0.25, "eta": 0.84, "replications": 1}"#,
    )
    .unwrap();
    let out = etaplan(&["run", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("f_l_s_r2.2_low_high,flow_low,seasonal,2.2,low,high,0.25,0.84,0,"), "{row}");
}
