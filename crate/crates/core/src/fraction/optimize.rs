use alloc::vec::Vec;

use super::FractionProposer;
use crate::optim::OptimizerState;
use crate::quantile::{segment_error, w1_fraction_gradient, w1_of_fractions, FractionSet, QuantileFunction, W1Options};
use crate::{Error, Result};

/// Logits beyond this magnitude count as divergence.
pub const MAX_LOGIT: f64 = 50.0;

/// The W1 trace is sampled every this many steps.
pub const TRACE_EVERY: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracePoint {
    pub step: usize,
    pub w1: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FractionOptimization {
    pub fractions: FractionSet,
    pub logits: Vec<f64>,
    /// W1 at step 0, every [`TRACE_EVERY`] steps, and after the last step.
    pub trace: Vec<TracePoint>,
}

impl FractionOptimization {
    pub fn final_w1(&self) -> f64 {
        self.trace.last().map_or(f64::NAN, |p| p.w1)
    }
}

/// Gradient descent on the proposer's logits towards the fractions that
/// minimize the 1-Wasserstein error against `qf`, with quantile values held
/// at their optimum for the current fractions.
///
/// Each step feeds the closed-form fraction gradient through the softmax
/// Jacobian (plus the entropy bonus, if any) into `state`. The W1 integral
/// itself is only evaluated for the diagnostic trace and never steers the
/// optimization.
pub fn optimize_fractions(
    qf: &QuantileFunction,
    mut proposer: FractionProposer,
    steps: usize,
    state: &mut OptimizerState,
) -> Result<FractionOptimization> {
    if proposer.len() < 2 {
        return Err(Error::InvalidParameter("fraction optimization needs N >= 2".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidParameter("fraction optimization needs at least one step".into()));
    }

    let opts = W1Options::default();
    let mut trace = Vec::with_capacity(steps / TRACE_EVERY + 2);
    let mut fractions = proposer.fractions()?;
    trace.push(TracePoint { step: 0, w1: w1_of_fractions(qf, &fractions, opts)? });

    for step in 1..=steps {
        let tau_grad = flush_cancellation_noise(qf, &fractions, w1_fraction_gradient(qf, &fractions));
        let grad = proposer.logit_gradient(&tau_grad)?;
        state.step(&mut proposer.logits, &grad);

        let max_logit = proposer.logits.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        if !(max_logit <= MAX_LOGIT) {
            return Err(Error::Diverged { step, max_logit });
        }
        fractions = proposer.fractions()?;
        if step % TRACE_EVERY == 0 || step == steps {
            trace.push(TracePoint { step, w1: w1_of_fractions(qf, &fractions, opts)? });
        }
    }

    Ok(FractionOptimization { fractions, logits: proposer.logits, trace })
}

/// Zeroes gradient entries that are indistinguishable from rounding error.
///
/// Each entry is `2 F^{-1}(tau_i) - F^{-1}(tau_hat_{i-1}) - F^{-1}(tau_hat_i)`,
/// which cancels to a few ulps at a stationary point. RMSProp divides by the
/// running gradient scale, so left alone that noise would be amplified into
/// steps of order the step size and push the fractions off the optimum.
fn flush_cancellation_noise(qf: &QuantileFunction, fractions: &FractionSet, mut grad: Vec<f64>) -> Vec<f64> {
    let mids = fractions.midpoints();
    for (k, (g, &tau)) in grad.iter_mut().zip(fractions.interior()).enumerate() {
        let scale = 2.0 * libm::fabs(qf.evaluate(tau))
            + libm::fabs(qf.evaluate(mids[k]))
            + libm::fabs(qf.evaluate(mids[k + 1]));
        if libm::fabs(*g) <= 16.0 * f64::EPSILON * scale {
            *g = 0.0;
        }
    }
    grad
}

/// Exhaustive search over interior fractions on the grid
/// `{resolution, 2 * resolution, ...}` for `N` in `{2, 3}`, with quantile
/// values pinned to their optimum. Returns the minimizing fractions and W1.
pub fn grid_search_oracle(qf: &QuantileFunction, n: usize, resolution: f64) -> Result<(FractionSet, f64)> {
    if !(n == 2 || n == 3) {
        return Err(Error::InvalidParameter(alloc::format!("grid search supports N in {{2, 3}}, got {n}")));
    }
    if !(1e-4..=1e-2).contains(&resolution) {
        return Err(Error::InvalidParameter(alloc::format!(
            "grid resolution must lie in [1e-4, 1e-2], got {resolution}"
        )));
    }
    let steps = libm::round(1.0 / resolution) as usize;
    let grid: Vec<f64> = (1..steps).map(|k| k as f64 / steps as f64).collect();
    let opts = W1Options::default();

    // W1 is a sum of per-segment terms, so memoize the two boundary segments.
    let segment = |a: f64, b: f64| segment_error(qf, a, b, qf.evaluate(0.5 * (a + b)), opts);

    let mut best = (f64::INFINITY, Vec::new());
    match n {
        2 => {
            for &t in &grid {
                let w = segment(0.0, t)? + segment(t, 1.0)?;
                if w < best.0 {
                    best = (w, alloc::vec![t]);
                }
            }
        }
        _ => {
            let head: Vec<f64> = grid.iter().map(|&t| segment(0.0, t)).collect::<Result<_>>()?;
            let tail: Vec<f64> = grid.iter().map(|&t| segment(t, 1.0)).collect::<Result<_>>()?;
            for i in 0..grid.len() {
                for j in i + 1..grid.len() {
                    let w = head[i] + segment(grid[i], grid[j])? + tail[j];
                    if w < best.0 {
                        best = (w, alloc::vec![grid[i], grid[j]]);
                    }
                }
            }
        }
    }
    Ok((FractionSet::new(&best.1)?, best.0))
}
