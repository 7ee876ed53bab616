//! Command-line driver: run scenarios, fire attack drills, and measure
//! throughput. Exit code 0 means every assertion of the invoked command
//! passed.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use courier_core::scenario::{
    bench_throughput, run_attack_suite, run_scenario, ScenarioConfig, ScenarioError, ATTACK_NAMES,
};

#[derive(Parser)]
#[command(name = "courierctl", version, about = "Courier delivery-verification simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and emit its JSON report.
    Run {
        /// Scenario configuration file (JSON); defaults apply if omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run attack drills; all must be rejected.
    Attack {
        /// `all` or a comma-separated list of drill names.
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Measure throughput over ascending order counts.
    Bench {
        /// Comma-separated, strictly ascending order counts.
        #[arg(long, default_value = "10,100")]
        orders: String,
        /// Accounting profile name.
        #[arg(long, default_value = "default")]
        profile: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the bench report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<(), ScenarioError> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| ScenarioError::Io(e.to_string()))?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn cmd_run(
    config: Option<PathBuf>,
    seed: Option<u64>,
    out: Option<PathBuf>,
) -> Result<bool, ScenarioError> {
    let mut cfg = match config {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| ScenarioError::Io(e.to_string()))?;
            serde_json::from_str::<ScenarioConfig>(&text)
                .map_err(|e| ScenarioError::ConfigInvalid(e.to_string()))?
        }
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = seed {
        cfg.seed = seed;
    }
    let run = run_scenario(&cfg)?;
    write_out(out.as_ref(), &run.report.to_validated_json()?)?;
    let failures = run.report.assertions();
    for failure in &failures {
        eprintln!("FAIL: {failure}");
    }
    eprintln!(
        "orders: {} delivered: {} verified: {}",
        run.report.orders_total, run.report.orders_delivered, run.report.orders_vb1
    );
    Ok(failures.is_empty())
}

fn cmd_attack(suite: &str, seed: u64) -> Result<bool, ScenarioError> {
    let names: Vec<String> = if suite == "all" {
        ATTACK_NAMES.iter().map(|n| n.to_string()).collect()
    } else {
        suite.split(',').map(|n| n.trim().to_string()).collect()
    };
    let report = run_attack_suite(&names, seed)?;
    for o in &report.outcomes {
        println!(
            "{}: {} ({})",
            o.name,
            if o.rejected { "rejected" } else { "NOT REJECTED" },
            o.detail
        );
    }
    Ok(report.all_rejected)
}

fn cmd_bench(
    orders: &str,
    profile: &str,
    seed: u64,
    out: Option<PathBuf>,
) -> Result<bool, ScenarioError> {
    let counts = orders
        .split(',')
        .map(|n| n.trim().parse::<u64>())
        .collect::<Result<Vec<u64>, _>>()
        .map_err(|e| ScenarioError::ConfigInvalid(format!("bad order count: {e}")))?;
    let report = bench_throughput(seed, profile, &counts)?;
    let text = serde_json::to_string_pretty(&report)
        .map_err(|e| ScenarioError::Internal(e.to_string()))?;
    write_out(out.as_ref(), &text)?;
    for row in &report.rows {
        eprintln!(
            "orders {:>7}  median {} ms  p95 {} ms  wall {} ms  ok {}/{}",
            row.orders, row.median_ms, row.p95_ms, row.wall_clock_ms, row.orders_ok, row.orders
        );
    }
    let all_ok = report.rows.iter().all(|r| r.orders_ok == r.orders);
    Ok(report.flat && all_ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config, seed, out } => cmd_run(config, seed, out),
        Command::Attack { suite, seed } => cmd_attack(&suite, seed),
        Command::Bench {
            orders,
            profile,
            seed,
            out,
        } => cmd_bench(&orders, &profile, seed, out),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
