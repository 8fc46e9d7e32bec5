//! Approximation benchmark: W1 of optimized, equally spaced and random
//! fractions, each with optimal quantile values.

use fqf_core::fraction::{grid_search_oracle, optimize_fractions, OptimizerState};
use fqf_core::quantile::{w1_of_fractions, W1Options};
use fqf_core::{FractionProposer, FractionSet, QuantileFunction};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RunContext;
use crate::config::{ApproxSection, ExperimentConfig};
use crate::distributions;
use crate::error::Result;
use crate::output::{write_csv, ResultRow};

/// Grid resolution of the `w1_oracle` rows written for `N <= 3`.
pub const ORACLE_RESOLUTION: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct ApproxCell {
    pub optimized: f64,
    pub equal: f64,
    pub random_mean: f64,
    pub fractions: FractionSet,
}

/// `draws` sets of `n - 1` sorted uniform interior fractions.
pub fn random_fraction_sets(n: usize, draws: usize, seed: u64) -> Result<Vec<FractionSet>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = Vec::with_capacity(draws);
    while sets.len() < draws {
        let mut interior: Vec<f64> = (1..n).map(|_| rng.random::<f64>()).collect();
        interior.sort_by(f64::total_cmp);
        // ties or a zero draw have probability ~2^-53; just redraw
        if let Ok(set) = FractionSet::new(&interior) {
            sets.push(set);
        }
    }
    Ok(sets)
}

/// Evaluates the three fraction schemes for one target and `n`.
pub fn evaluate_cell(
    qf: &QuantileFunction,
    n: usize,
    seed: u64,
    section: &ApproxSection,
    mut optimizer: OptimizerState,
) -> Result<ApproxCell> {
    let opts = W1Options::default();
    let proposer = FractionProposer::uniform(n, section.entropy_coeff)?;
    let run = optimize_fractions(qf, proposer, section.steps, &mut optimizer)?;
    let equal = w1_of_fractions(qf, &FractionSet::equally_spaced(n)?, opts)?;
    let mut random_total = 0.0;
    for set in random_fraction_sets(n, section.random_draws, seed)? {
        random_total += w1_of_fractions(qf, &set, opts)?;
    }
    Ok(ApproxCell {
        optimized: run.final_w1(),
        equal,
        random_mean: random_total / section.random_draws as f64,
        fractions: run.fractions,
    })
}

pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<()> {
    let section = &config.approx;
    let mut cells = Vec::new();
    for name in &section.distributions {
        for &n in &section.n {
            for &seed in &config.seeds {
                cells.push((name.as_str(), n, seed));
            }
        }
    }
    let rows: Vec<Vec<ResultRow>> = cells
        .par_iter()
        .map(|&(name, n, seed)| -> Result<Vec<ResultRow>> {
            let qf = distributions::by_name(name)?;
            let cell = evaluate_cell(&qf, n, seed, section, config.optimizer.build(section.steps)?)?;
            let id = format!("{}/{name}/N{n}", ctx.id);
            let step = section.steps as u64;
            let mut rows = vec![
                ctx.row(&id, seed, step, "w1_optimized", cell.optimized),
                ctx.row(&id, seed, step, "w1_equal", cell.equal),
                ctx.row(&id, seed, step, "w1_random_mean", cell.random_mean),
            ];
            if n <= 3 {
                let (_, oracle) = grid_search_oracle(&qf, n, ORACLE_RESOLUTION)?;
                rows.push(ctx.row(&id, seed, step, "w1_oracle", oracle));
            }
            log::info!(
                "{id} seed {seed}: optimized {:.6} equal {:.6} random {:.6}",
                cell.optimized,
                cell.equal,
                cell.random_mean
            );
            Ok(rows)
        })
        .collect::<Result<_>>()?;
    let path = write_csv(&ctx.out.join("approx.csv"), &rows.concat())?;
    log::info!("wrote {}", path.display());
    Ok(())
}
