pub mod approx;
pub mod gradcheck;
pub mod optimize;
pub mod sweep;
pub mod train;

use std::path::PathBuf;
use std::time::Instant;

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::output::ResultRow;

/// What every command needs besides its own config section.
#[derive(Debug, Clone)]
pub struct RunContext {
    pub id: String,
    pub out: PathBuf,
    started: Option<Instant>,
}

impl RunContext {
    pub fn new(config: &ExperimentConfig, kind: ExperimentKind) -> Self {
        Self { id: config.experiment_id(kind), out: config.out.clone(), started: config.timing.then(Instant::now) }
    }

    /// A row stamped with the elapsed time when timing is on.
    pub fn row(&self, id: &str, seed: u64, step: u64, metric: impl Into<String>, value: f64) -> ResultRow {
        let mut row = ResultRow::new(id, seed, step, metric, value);
        row.wall_ms = self.started.map(|t| t.elapsed().as_millis() as u64);
        row
    }
}
