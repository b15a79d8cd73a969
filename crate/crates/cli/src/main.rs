use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rare_events_cli::output::{emit, run_rows, to_csv, to_json, RUN_COLUMNS};
use rare_events_cli::preset::{run_preset, table1_config, TABLE1_COLUMNS};
use rare_events_cli::sweep::{parse_values, sweep_horizon, SWEEP_COLUMNS};
use rare_events_cli::{estimate, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "rare-events", version, about = "Rare-event probability estimation experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON output path (standard output when omitted, for `estimate`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV output path.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Overrides the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the worker count.
    #[arg(long)]
    parallelism: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Axis {
    Horizon,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Table1,
}

#[derive(Subcommand)]
enum Command {
    /// Runs the configured estimator `runs` times.
    Estimate {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Adds wall-clock seconds to the JSON record.
        #[arg(long)]
        record_timing: bool,
    },
    /// Runs every configured estimator at each value of an axis.
    Sweep {
        config: PathBuf,
        #[arg(long, value_enum)]
        axis: Axis,
        /// Comma-separated, strictly increasing.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[command(flatten)]
        common: Common,
    },
    /// Runs a built-in experiment.
    Preset {
        #[arg(value_enum)]
        name: Preset,
        #[arg(long, default_value_t = 100)]
        runs: usize,
        #[command(flatten)]
        common: Common,
    },
}

fn load(path: &Path, common: &Common) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(path)?;
    if let Some(seed) = common.seed {
        cfg.seed = seed;
    }
    if let Some(p) = common.parallelism {
        cfg.parallelism = p;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Estimate {
            config,
            common,
            record_timing,
        } => {
            let cfg = load(&config, &common)?;
            let record = estimate(&cfg, record_timing)?;
            emit(common.out.as_deref(), &to_json(&record))?;
            if let Some(path) = &common.csv {
                emit(Some(path), &to_csv(&run_rows(&record.estimator, &record.runs), &RUN_COLUMNS)?)?;
            }
        }
        Command::Sweep {
            config,
            axis: Axis::Horizon,
            values,
            common,
        } => {
            let cfg = load(&config, &common)?;
            let values = parse_values(&values)?;
            let record = sweep_horizon(&cfg, &values)?;
            emit(common.csv.as_deref(), &to_csv(&record.rows, &SWEEP_COLUMNS)?)?;
            if let Some(path) = &common.out {
                emit(Some(path), &to_json(&record))?;
            }
        }
        Command::Preset {
            name: Preset::Table1,
            runs,
            common,
        } => {
            let cfg = table1_config(runs, common.seed.unwrap_or(0), common.parallelism.unwrap_or(1));
            let record = run_preset(&cfg)?;
            emit(common.csv.as_deref(), &to_csv(&record.rows, &TABLE1_COLUMNS)?)?;
            if let Some(path) = &common.out {
                emit(Some(path), &to_json(&record))?;
            }
            if let Some(bad) = record.rows.iter().find(|r| r.status != "ok") {
                return Err(CliError::Estimator(format!("{}: {}", bad.method, bad.status)));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
