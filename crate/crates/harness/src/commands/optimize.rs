//! Single fraction optimization run with its W1 trace.

use fqf_core::fraction::optimize_fractions;
use fqf_core::FractionProposer;

use super::RunContext;
use crate::config::ExperimentConfig;
use crate::distributions;
use crate::error::Result;
use crate::output::write_csv;

pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<()> {
    let o = &config.optimize;
    let qf = distributions::by_name(&o.distribution)?;
    let id = format!("{}/{}/N{}", ctx.id, o.distribution, o.n);
    let mut rows = Vec::new();
    // Seeds only label the rows: the optimizer itself is deterministic.
    for &seed in &config.seeds {
        let logits = o.init_logits.clone().unwrap_or_else(|| vec![0.0; o.n]);
        let proposer = FractionProposer::new(logits, o.entropy_coeff)?;
        let result = optimize_fractions(&qf, proposer, o.steps, &mut config.optimizer.build(o.steps)?)?;
        for point in &result.trace {
            rows.push(ctx.row(&id, seed, point.step as u64, "w1", point.w1));
        }
        let last = o.steps as u64;
        for (i, tau) in result.fractions.interior().iter().enumerate() {
            rows.push(ctx.row(&id, seed, last, format!("tau_{}", i + 1), *tau));
        }
        rows.push(ctx.row(&id, seed, last, "min_width", result.fractions.min_width()));
        log::info!("{id} seed {seed}: W1 {:.6} -> {:.6}", result.trace[0].w1, result.final_w1());
    }
    write_csv(&ctx.out.join("optimize.csv"), &rows)?;
    Ok(())
}
