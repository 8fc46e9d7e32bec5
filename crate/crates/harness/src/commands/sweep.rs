//! Agent-kind by `N` by seed sweeps. Cells run on the worker pool and
//! write their own files; the merge reads them back in a fixed order.

use fqf_core::rl::AgentConfig;
use rayon::prelude::*;

use super::train::{checkpoint_path, resolve_env, train_one};
use super::RunContext;
use crate::checkpoint::Checkpoint;
use crate::config::{parse_kind, ExperimentConfig};
use crate::error::{HarnessError, Result};
use crate::output::{read_csv, write_csv, CsvSink};

pub fn cell_name(kind: &str, n: usize, seed: u64) -> String {
    format!("{kind}-N{n}-seed{seed}")
}

pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<()> {
    let mdp = resolve_env(config)?;
    let base = config.train.agent.apply(AgentConfig::default())?;
    let cells_dir = ctx.out.join("cells");
    let mut cells = Vec::new();
    for kind in &config.sweep.kinds {
        for &n in &config.sweep.n {
            for &seed in &config.seeds {
                cells.push((kind.as_str(), n, seed));
            }
        }
    }
    let errors: Vec<Option<HarnessError>> = cells
        .par_iter()
        .map(|&(kind, n, seed)| -> Result<Option<HarnessError>> {
            let agent_config = AgentConfig { kind: parse_kind(kind)?, n_fractions: n, ..base.clone() };
            let name = cell_name(kind, n, seed);
            let id = format!("{}/{kind}/N{n}", ctx.id);
            let outcome = train_one(ctx, &id, &mdp, agent_config, &config.train, seed)?;
            write_csv(&cells_dir.join(format!("{name}.csv")), &outcome.rows)?;
            if outcome.error.is_none() {
                Checkpoint::capture(&outcome.agent, &mdp.name, seed).save(&checkpoint_path(&cells_dir, &name))?;
            }
            log::info!("cell {name} done");
            Ok(outcome.error)
        })
        .collect::<Result<_>>()?;

    let mut merged = CsvSink::create(&ctx.out.join("sweep.csv"))?;
    for &(kind, n, seed) in &cells {
        merged.write_all(&read_csv(&cells_dir.join(format!("{}.csv", cell_name(kind, n, seed))))?)?;
    }
    merged.finish()?;
    errors.into_iter().flatten().next().map_or(Ok(()), Err)
}
