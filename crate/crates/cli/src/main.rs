//! `rbam`: run, score and report support/attack relation experiments.
//!
//! Exit status is 0 on success, 1 for usage or configuration errors and 2
//! when something fails at run time.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use rbam_core::labeling::LabelPolicy;
use rbam_core::metrics::{score_predictions_file, MetricsError};
use rbam_core::runner::{self, RunConfig, RunError, RunOptions};

#[derive(Parser)]
#[command(name = "rbam", version, about = "Support/attack relation classification harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured experiment and write records and summaries.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overwrite the results of an earlier run.
        #[arg(long)]
        force: bool,
    },
    /// Print label counts and text lengths of the configured datasets.
    Stats {
        #[arg(long)]
        config: PathBuf,
    },
    /// Score a records file.
    Score {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = Policy::Ignore)]
        policy: Policy,
    },
    /// Render the summary of a records file.
    Report {
        #[arg(long)]
        records: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
        #[arg(long, value_enum, default_value_t = Policy::Ignore)]
        policy: Policy,
    },
    /// Check a config without running anything.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Table,
}

#[derive(Clone, Copy, ValueEnum)]
enum Policy {
    Ignore,
    CountAsError,
}

impl From<Policy> for LabelPolicy {
    fn from(p: Policy) -> Self {
        match p {
            Policy::Ignore => LabelPolicy::Ignore,
            Policy::CountAsError => LabelPolicy::CountAsError,
        }
    }
}

enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        if e.is_config_error() {
            Failure::Usage(e.into())
        } else {
            Failure::Runtime(e.into())
        }
    }
}

fn load_config(path: &Path) -> Result<RunConfig, Failure> {
    RunConfig::from_path(path).map_err(Failure::from)
}

fn score(records: &Path, policy: Policy) -> Result<rbam_core::SummaryTable, Failure> {
    if !records.is_file() {
        return Err(Failure::Usage(anyhow!("{} is not a file", records.display())));
    }
    score_predictions_file(records, policy.into()).map_err(|e| match e {
        MetricsError::NoRows => Failure::Runtime(anyhow!("{} holds no records", records.display())),
        e => Failure::Runtime(e.into()),
    })
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { config, force } => {
            let config = load_config(&config)?;
            let outcome = runner::run(&config, RunOptions { force })?;
            print!("{}", outcome.summary.to_text_table());
            let failed: usize = outcome.summary.rows.iter().map(|r| r.n_failed).sum();
            if failed > 0 {
                log::warn!("{failed} pair(s) failed; see records.jsonl");
            }
            eprintln!("results written to {}", outcome.output_dir.display());
        }
        Command::Stats { config } => {
            let config = load_config(&config)?;
            let problems: Vec<String> = config
                .datasets
                .iter()
                .filter(|d| !d.path.exists())
                .map(|d| format!("{}: {} does not exist", d.descriptor.name, d.path.display()))
                .collect();
            if !problems.is_empty() {
                return Err(RunError::Config(problems).into());
            }
            let rows = runner::dataset_stats(&config)?;
            print!("{}", runner::render_stats_table(&rows));
        }
        Command::Score { records, policy } => {
            print!("{}", score(&records, policy)?.to_text_table());
        }
        Command::Report {
            records,
            format,
            policy,
        } => {
            let summary = score(&records, policy)?;
            match format {
                Format::Csv => print!("{}", summary.to_csv()),
                Format::Table => print!("{}", summary.to_text_table()),
            }
        }
        Command::Validate { config } => {
            let parsed = load_config(&config)?;
            let problems = parsed.validate();
            if !problems.is_empty() {
                return Err(RunError::Config(problems).into());
            }
            println!("{}: ok", config.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command).map_err(|f| match f {
        Failure::Usage(e) => (1, e),
        Failure::Runtime(e) => (2, e),
    }) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(code)
        }
    }
}
