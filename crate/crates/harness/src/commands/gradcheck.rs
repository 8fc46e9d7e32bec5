//! Finite-difference audits of the fraction gradient and of backprop.

use fqf_core::audit::{backprop_audit, fraction_gradient_audit, AuditReport};

use super::RunContext;
use crate::config::ExperimentConfig;
use crate::error::{HarnessError, Result};
use crate::output::{write_csv, ResultRow};

fn report_rows(ctx: &RunContext, suite: &str, seed: u64, report: &AuditReport) -> Vec<ResultRow> {
    let id = format!("{}/{suite}", ctx.id);
    vec![
        ctx.row(&id, seed, 0, "max_rel_error", report.max_rel_error()),
        ctx.row(&id, seed, 0, "cases", report.cases.len() as f64),
        ctx.row(&id, seed, 0, "skipped", report.skipped as f64),
        ctx.row(&id, seed, 0, "max_abs_gradient", report.max_abs_gradient),
    ]
}

/// Writes the CSV first, then fails with exit code 2 if any suite reached
/// the tolerance.
pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<()> {
    let g = &config.gradcheck;
    let mut rows = Vec::new();
    let mut failure = None;
    for &seed in &config.seeds {
        let prop1 = fraction_gradient_audit(g.pairs, seed, g.flip_sign)?;
        let backprop = backprop_audit(g.nets, g.params_per_net, seed, g.flip_sign, g.zero_params)?;
        for (suite, report) in [("prop1", &prop1), ("backprop", &backprop)] {
            rows.extend(report_rows(ctx, suite, seed, report));
            log::info!(
                "{suite} seed {seed}: {} cases, {} skipped, max rel error {:e}",
                report.cases.len(),
                report.skipped,
                report.max_rel_error()
            );
            if !report.passed(g.tolerance) && failure.is_none() {
                failure = Some(HarnessError::GradcheckFailed {
                    suite,
                    max_rel_error: report.max_rel_error(),
                    tolerance: g.tolerance,
                });
            }
        }
    }
    write_csv(&ctx.out.join("gradcheck.csv"), &rows)?;
    failure.map_or(Ok(()), Err)
}
