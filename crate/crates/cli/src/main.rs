use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use cvarvi::problems::PRESETS;
use cvarvi_cli::{
    emit_plot_data, read_trace_dir, run_experiment, seed_offset_from_env, summarize_table, ExperimentConfig, RunOptions,
};

#[derive(Parser)]
#[command(name = "cvarvi", version, about = "Stochastic CVaR variational inequality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a TOML config.
    Run {
        config: PathBuf,
        /// Runs executed at once.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Mean post-crossing error per algorithm and sample size.
    Table {
        trace_dir: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        thresholds: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
        /// Emit CSV instead of aligned text.
        #[arg(long)]
        csv: bool,
    },
    /// Long-format CSV of all traces for plotting.
    Plotdata {
        trace_dir: PathBuf,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Built-in problems.
    Presets {
        #[command(subcommand)]
        action: PresetsAction,
    },
}

#[derive(Subcommand)]
enum PresetsAction {
    List,
}

enum Failure {
    Config(anyhow::Error),
    Other(anyhow::Error),
}

impl<E: Into<anyhow::Error>> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Other(e.into())
    }
}

/// Writes to stdout; a reader closing the pipe early is not an error.
fn emit(text: &str) -> io::Result<()> {
    match io::stdout().lock().write_all(text.as_bytes()) {
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => Ok(()),
        r => r,
    }
}

fn config_error(e: impl Into<anyhow::Error>) -> Failure {
    Failure::Config(e.into())
}

fn execute(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run { config, jobs } => {
            let cfg = ExperimentConfig::load(&config).map_err(config_error)?;
            let seed_offset = seed_offset_from_env().map_err(config_error)?;
            if jobs == 0 {
                return Err(config_error(anyhow::anyhow!("--jobs must be at least 1")));
            }
            let outcome = run_experiment(&cfg, &RunOptions { jobs, seed_offset })?;
            for g in &outcome.summary.groups {
                let err = g.terminal_error.as_ref().map_or("n/a".to_string(), |s| format!("{:.4e}", s.mean));
                println!(
                    "{} N={}: {} runs, {} completed, {} diverged, {} failed, mean terminal error {err}",
                    outcome.summary.algorithm, g.samples, g.runs, g.completed, g.diverged, g.failed
                );
            }
            println!("summary written to {}", outcome.summary_path.display());
        }
        Command::Table { trace_dir, thresholds, sizes, csv } => {
            let traces = read_trace_dir(&trace_dir)?;
            let table = summarize_table(&traces, &thresholds, &sizes).map_err(config_error)?;
            emit(&if csv { table.to_csv() } else { table.to_text() })?;
        }
        Command::Plotdata { trace_dir, out } => {
            let data = emit_plot_data(&read_trace_dir(&trace_dir)?);
            match out {
                Some(path) => fs::write(&path, data).with_context(|| format!("cannot write {}", path.display()))?,
                None => emit(&data)?,
            }
        }
        Command::Presets { action: PresetsAction::List } => {
            for (name, description) in PRESETS {
                println!("{name:<18} {description}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
