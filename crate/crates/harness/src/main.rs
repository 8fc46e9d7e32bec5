use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fqf_harness::config::{ExperimentConfig, ExperimentKind};
use fqf_harness::error::Result;

#[derive(Debug, Parser)]
#[command(
    name = "fqf",
    version,
    about = "Quantile fraction experiments: approximation benchmarks, gradient audits and toy RL training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (TOML). Built-in defaults are used without one.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Run a single seed instead of the configured list.
    #[arg(long, global = true, value_name = "INT")]
    seed: Option<u64>,

    /// Output directory, overriding the config.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Only log warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// W1 of optimized, equally spaced and random fractions.
    Approx,
    /// Finite-difference audits of the fraction gradient and backprop.
    Gradcheck,
    /// One fraction optimization run with its W1 trace.
    Optimize,
    /// Train an agent and write learning curves plus a checkpoint.
    Train,
    /// Train every agent kind and N on the worker pool.
    Sweep,
}

impl Command {
    fn kind(self) -> ExperimentKind {
        match self {
            Command::Approx => ExperimentKind::Approx,
            Command::Gradcheck => ExperimentKind::Gradcheck,
            Command::Optimize => ExperimentKind::Optimize,
            Command::Train => ExperimentKind::Train,
            Command::Sweep => ExperimentKind::Sweep,
        }
    }
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = cli.seed {
        config.seeds = vec![seed];
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    Ok(config)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // usage errors count as invalid configuration
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();

    let kind = cli.command.kind();
    match load(&cli).and_then(|config| fqf_harness::run(kind, &config)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
