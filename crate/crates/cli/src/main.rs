use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use seqcode::feasibility::{check_feasible, Configuration};
use seqcode::harness::experiment::{run_experiment, write_outputs};
use seqcode::harness::selftest::{demo_encode, oracle_check};
use seqcode::harness::{ExperimentConfig, Preset};

/// Coded sequential matrix-vector multiplication on a simulated straggler
/// cluster.
#[derive(Debug, Parser)]
#[command(name = "seqcode", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check whether a configuration fits the cluster's row capacity.
    Feasible(ClusterArgs),
    /// Encode random matrices, dump per-row provenance as CSV and decode
    /// from every worker subset.
    DemoEncode(DemoArgs),
    /// Run paired sequential/baseline lasso replications.
    Experiment(ExperimentArgs),
    /// Compare the row-count formula with brute force over a grid.
    OracleCheck(OracleArgs),
}

#[derive(Debug, Args)]
struct ClusterArgs {
    /// Number of workers.
    #[arg(long = "L", value_name = "L")]
    workers: usize,
    /// Rows each worker stores.
    #[arg(long = "n", value_name = "N")]
    rows_per_worker: usize,
    /// Rows per level, comma separated (k_1,...,k_L).
    #[arg(long = "k", value_name = "K", value_delimiter = ',', required = true)]
    k: Vec<usize>,
}

#[derive(Debug, Args)]
struct DemoArgs {
    #[command(flatten)]
    cluster: ClusterArgs,
    /// Columns of the source matrices.
    #[arg(long = "m", value_name = "M", default_value_t = 7)]
    columns: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the CSV here instead of standard output.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ExperimentArgs {
    /// example1 or example2.
    preset: Option<String>,
    /// Experiment config file (TOML).
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    replications: Option<usize>,
    /// Replications whose per-iteration traces are kept.
    #[arg(long)]
    trace_replications: Option<usize>,
    /// Directory for trace.csv, summary.csv and report.txt.
    #[arg(long, value_name = "DIR")]
    output: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[arg(long, default_value_t = 5)]
    max_workers: usize,
    #[arg(long, default_value_t = 12)]
    max_rows: usize,
}

enum Failure {
    Usage(String),
    Validation(String),
    Runtime(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Self::Usage(_) => 1,
            Self::Validation(_) => 2,
            Self::Runtime(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Self::Usage(m) | Self::Validation(m) | Self::Runtime(m) => m,
        }
    }
}

fn validation(e: impl ToString) -> Failure {
    Failure::Validation(e.to_string())
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Feasible(a) => feasible(a),
        Command::DemoEncode(a) => demo(a),
        Command::Experiment(a) => experiment(a),
        Command::OracleCheck(a) => oracle(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn configuration(a: &ClusterArgs) -> Result<Configuration, Failure> {
    if a.k.len() != a.workers {
        return Err(Failure::Usage(format!(
            "--k lists {} levels but --L is {}",
            a.k.len(),
            a.workers
        )));
    }
    Configuration::new(a.workers, a.rows_per_worker, a.k.clone()).map_err(|e| Failure::Usage(e.to_string()))
}

fn feasible(a: ClusterArgs) -> Result<(), Failure> {
    let cfg = configuration(&a)?;
    let (budget, ok) = check_feasible(&cfg);
    println!("configuration {cfg}");
    for (i, s) in budget.per_level.iter().enumerate() {
        println!("  level {}: k = {:>3}  s = {s}", i + 1, cfg.k()[i]);
    }
    println!("total {}/{}", budget.total, budget.capacity);
    if ok {
        println!("feasible{}", if budget.is_tight() { " (tight)" } else { "" });
        Ok(())
    } else {
        println!("infeasible");
        Err(validation(format!(
            "{} encoded rows exceed capacity {}",
            budget.total, budget.capacity
        )))
    }
}

fn demo(a: DemoArgs) -> Result<(), Failure> {
    let cfg = configuration(&a.cluster)?;
    let (budget, ok) = check_feasible(&cfg);
    if !ok {
        return Err(validation(format!(
            "infeasible configuration {cfg}: {} encoded rows exceed capacity {}",
            budget.total, budget.capacity
        )));
    }
    let d = demo_encode(&cfg, a.columns, a.seed).map_err(runtime)?;
    let verdict = format!(
        "self-test: {} worker subsets, max relative error {:.3e} (tolerance {:.0e}): {}",
        d.subsets_checked,
        d.max_relative_error,
        d.tolerance,
        if d.passed() { "PASS" } else { "FAIL" }
    );
    match &a.output {
        Some(path) => {
            fs::write(path, d.provenance_csv()).map_err(|e| runtime(format!("{}: {e}", path.display())))?;
            println!("wrote {} rows to {}", d.system.total_rows(), path.display());
            println!("{verdict}");
        }
        None => {
            print!("{}", d.provenance_csv());
            eprintln!("{verdict}");
        }
    }
    if d.passed() {
        Ok(())
    } else {
        Err(runtime("decode self-test failed"))
    }
}

fn experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let mut cfg = match (&a.preset, &a.config) {
        (Some(_), Some(_)) => {
            return Err(Failure::Usage(
                "give either a preset or --config (a config file may name a preset itself)".into(),
            ))
        }
        (None, None) => {
            return Err(Failure::Usage(
                "give a preset (example1, example2) or --config FILE".into(),
            ))
        }
        (Some(name), None) => Preset::parse(name)
            .ok_or_else(|| Failure::Usage(format!("unknown preset {name:?}; expected example1 or example2")))?
            .config(),
        (None, Some(path)) => ExperimentConfig::from_file(path).map_err(validation)?,
    };
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.replications {
        cfg.replications = v;
    }
    if let Some(v) = a.trace_replications {
        cfg.trace_replications = v;
    }
    if let Some(v) = a.output {
        cfg.output = Some(v);
    }
    let exp = cfg.validate().map_err(validation)?;
    let report = run_experiment(&exp).map_err(runtime)?;
    print!("{}", report.render());
    if let Some(dir) = &exp.config.output {
        let files = write_outputs(&report, dir).map_err(runtime)?;
        for f in files {
            println!("wrote {}", f.display());
        }
    }
    Ok(())
}

fn oracle(a: OracleArgs) -> Result<(), Failure> {
    let sweep = oracle_check(a.max_workers, a.max_rows).map_err(validation)?;
    print!("{}", sweep.render());
    if sweep.passed() {
        Ok(())
    } else {
        Err(runtime("formula and brute force disagree"))
    }
}
