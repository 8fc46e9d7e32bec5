//! Experiment harness for fully parameterized quantile functions.
//!
//! Each subcommand of the `fqf` binary reads one TOML [`config`] file, runs
//! on a worker pool capped by `QF_THREADS`, and writes CSV rows with the
//! fixed [`output::HEADER`]. Training runs also leave JSON [`checkpoint`]s.

pub mod checkpoint;
pub mod commands;
pub mod config;
pub mod distributions;
pub mod env_config;
pub mod error;
pub mod output;

use config::{ExperimentConfig, ExperimentKind};
use error::{HarnessError, Result};

/// Name of the environment variable capping the worker pool.
pub const THREADS_ENV: &str = "QF_THREADS";

/// Worker pool sized by `QF_THREADS`, or by the available parallelism when
/// it is unset.
pub fn thread_pool() -> Result<rayon::ThreadPool> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(raw) => match raw.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(HarnessError::Config(format!("{THREADS_ENV} must be a positive integer, got {raw:?}"))),
        },
        Err(_) => 0,
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Config(format!("cannot start worker pool: {e}")))
}

/// Validates `config` for `kind`, creates the output directory and runs the
/// experiment on the worker pool.
pub fn run(kind: ExperimentKind, config: &ExperimentConfig) -> Result<()> {
    config.validate(kind)?;
    std::fs::create_dir_all(&config.out).map_err(|e| HarnessError::io(&config.out, e))?;
    let pool = thread_pool()?;
    let ctx = commands::RunContext::new(config, kind);
    pool.install(|| match kind {
        ExperimentKind::Approx => commands::approx::run(config, &ctx),
        ExperimentKind::Gradcheck => commands::gradcheck::run(config, &ctx),
        ExperimentKind::Optimize => commands::optimize::run(config, &ctx),
        ExperimentKind::Train => commands::train::run(config, &ctx),
        ExperimentKind::Sweep => commands::sweep::run(config, &ctx),
    })
}
