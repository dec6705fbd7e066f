use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use etaplan::checks;
use etaplan::io::{read_results_file, write_results, write_results_file};
use etaplan::{emit_report, sweep_grid, ExperimentPlan, HarnessError};
use etaplan_core::scenario::{alpha_grid, eta_grid, load_scenario, ScenarioConfig};

#[derive(Parser)]
#[command(name = "etaplan", version, about = "Planned-utilization experiments on a simulated make-to-stock plant")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Scale {
    /// Four simulated years and ten replications.
    #[arg(long)]
    full_scale: bool,
    /// Replications per cell.
    #[arg(long)]
    reps: Option<u32>,
    /// Base seed; defaults to the one in the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Replications of one scenario at one alpha and eta.
    Run {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        alpha: Option<f64>,
        #[command(flatten)]
        scale: Scale,
        /// Results CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Grid over alpha and eta for one scenario.
    Sweep {
        #[arg(long)]
        config: Option<PathBuf>,
        /// `full` or a comma-separated list.
        #[arg(long, default_value = "full")]
        eta_grid: String,
        #[arg(long, default_value = "0")]
        alpha_grid: String,
        #[command(flatten)]
        scale: Scale,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Summary tables from a results CSV.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value = "f_m_c")]
        baseline: String,
        /// Directory for the CSV tables and the text rendering.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Runs the fast oracle and invariant checks.
    Selftest,
}

fn parse_grid(text: &str, full: fn() -> Vec<f64>) -> Result<Vec<f64>, HarnessError> {
    if text == "full" {
        return Ok(full());
    }
    text.split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| HarnessError::Validation(format!("grid value {s:?}: {e}"))))
        .collect()
}

fn scenario(config: &Option<PathBuf>) -> Result<ScenarioConfig, HarnessError> {
    Ok(match config {
        Some(path) => load_scenario(path)?,
        None => ScenarioConfig::basic(),
    })
}

fn plan_for(cfg: ScenarioConfig, alphas: Vec<f64>, etas: Vec<f64>, scale: &Scale) -> ExperimentPlan {
    let mut plan = ExperimentPlan::desk(vec![cfg.clone()], alphas, etas);
    plan.years = cfg.years;
    plan.warmup_years = cfg.warmup_years;
    plan.replications = cfg.replications;
    if scale.full_scale {
        plan = plan.full_scale();
    }
    if let Some(r) = scale.reps {
        plan.replications = r;
    }
    if let Some(s) = scale.seed {
        plan.base_seed = s;
    }
    plan
}

fn execute(plan: &ExperimentPlan, out: &Option<PathBuf>) -> Result<(), HarnessError> {
    let outcome = sweep_grid(plan)?;
    match out {
        Some(path) => write_results_file(path, &outcome.rows)?,
        None => write_results(std::io::stdout().lock(), &outcome.rows)?,
    }
    for (cell, msg) in &outcome.failures {
        eprintln!("failed: {cell}: {msg}");
    }
    if let Some((first, _)) = outcome.failures.first() {
        return Err(HarnessError::Partial {
            failed: outcome.failures.len(),
            total: outcome.failures.len() + outcome.rows.len(),
            first: first.clone(),
        });
    }
    Ok(())
}

fn selftest() -> bool {
    let checks: [(&str, fn() -> checks::Verdict); 5] = [
        ("milp vs enumeration", || checks::milp_oracle(50, 1)),
        ("calibration", checks::calibration),
        ("order rate", checks::order_rate_example),
        ("mps/mrp properties", || checks::planning_properties(1000, 2)),
        ("conservation and determinism", checks::conservation_and_determinism),
    ];
    let mut ok = true;
    for (name, check) in checks {
        let v = check();
        println!("{} {name}: {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        ok &= v.pass;
    }
    ok
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, eta, alpha, scale, out } => scenario(&config).and_then(|cfg| {
            let (a, e) = (alpha.unwrap_or(cfg.alpha), eta.unwrap_or(cfg.eta));
            execute(&plan_for(cfg, vec![a], vec![e], &scale), &out)
        }),
        Command::Sweep { config, eta_grid: eg, alpha_grid: ag, scale, out } => scenario(&config).and_then(|cfg| {
            let etas = parse_grid(&eg, eta_grid)?;
            let alphas = parse_grid(&ag, alpha_grid)?;
            execute(&plan_for(cfg, alphas, etas, &scale), &out)
        }),
        Command::Report { input, baseline, out_dir } => read_results_file(&input).and_then(|rows| {
            let report = emit_report(&rows, &baseline)?;
            print!("{}", report.render_text());
            if let Some(dir) = out_dir {
                report.write_to(dir)?;
            }
            Ok(())
        }),
        Command::Selftest => {
            if selftest() {
                Ok(())
            } else {
                return ExitCode::from(2);
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
