//! Command-line front end for the reconciliation experiments.
//!
//! Exit codes: 0 success, 1 configuration error, 2 missing or malformed
//! data, 3 runtime failure.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sprec::error::Result;
use sprec::harness::{read_config_file, run_experiment, Experiment, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "sprec",
    version,
    about = "Information reconciliation experiments: rate-adapted syndrome coding versus Cascade"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cascade leakage over a grid of error rates and string lengths.
    CascadeTable(CommonArgs),
    /// Asymptotic leakage of both protocols against the entropy limit.
    LeakageCurve(CommonArgs),
    /// Finite-key secret fraction versus the number of exchanged signals.
    FiniteKeyCurve(CommonArgs),
    /// One full reconciliation, reported in detail.
    SingleRun(CommonArgs),
}

#[derive(Args)]
struct CommonArgs {
    /// Configuration file (key = value lines, # comments).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed, overriding the config file.
    #[arg(long)]
    seed: Option<u64>,
    /// Trial count, overriding the config file.
    #[arg(long)]
    trials: Option<usize>,
    /// Output CSV path, overriding the config file.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(experiment: Experiment, args: &CommonArgs) -> Result<()> {
    let text = match &args.config {
        Some(path) => Some(read_config_file(path)?),
        None => None,
    };
    let over = Overrides {
        seed: args.seed,
        trials: args.trials,
        out: args.out.clone(),
    };
    let config = ExperimentConfig::build(experiment, text.as_deref(), &over)?;
    let output = run_experiment(&config)?;
    output.doc.write_to(&config.out)?;
    for line in &output.summary {
        println!("{line}");
    }
    println!("wrote {}", config.out.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are not errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (experiment, args) = match &cli.command {
        Command::CascadeTable(a) => (Experiment::CascadeTable, a),
        Command::LeakageCurve(a) => (Experiment::LeakageCurve, a),
        Command::FiniteKeyCurve(a) => (Experiment::FiniteKeyCurve, a),
        Command::SingleRun(a) => (Experiment::SingleRun, a),
    };
    match run(experiment, args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
