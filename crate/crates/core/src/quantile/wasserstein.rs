//! 1-Wasserstein error of staircase approximations, the optimal quantile
//! values for fixed fractions, and the gradient of the error with respect to
//! the fractions.

use alloc::vec::Vec;

use super::{FractionSet, QuantileFunction, StaircaseApproximation};
use crate::quadrature::{adaptive_simpson, SimpsonConfig};
use crate::{Error, Result};

/// Tolerances for [`w1_error_with`]. The absolute tolerance applies to each
/// segment separately.
pub type W1Options = SimpsonConfig;

/// `W1 = sum_i integral_{tau_i}^{tau_{i+1}} |F^{-1}(w) - theta_i| dw` with
/// default tolerances (1e-8 per segment, depth 40).
pub fn w1_error(qf: &QuantileFunction, approx: &StaircaseApproximation) -> Result<f64> {
    w1_error_with(qf, approx, W1Options::default())
}

/// [`w1_error`] with explicit tolerances.
///
/// Each segment is cut at the jumps of `qf` and at the point where `F^{-1}`
/// crosses `theta_i`, so every piece handed to the integrator is continuous
/// and free of the absolute-value kink.
pub fn w1_error_with(qf: &QuantileFunction, approx: &StaircaseApproximation, opts: W1Options) -> Result<f64> {
    let bounds = approx.fractions().bounds();
    let breaks = qf.breakpoints();
    let mut total = 0.0;
    for (segment, (w, &theta)) in bounds.windows(2).zip(approx.values()).enumerate() {
        total +=
            segment_error_inner(qf, &breaks, w[0], w[1], theta, opts).ok_or(Error::IntegrationDiverged { segment })?;
    }
    Ok(total)
}

/// `integral_a^b |F^{-1}(w) - theta| dw` for a single segment.
pub fn segment_error(qf: &QuantileFunction, a: f64, b: f64, theta: f64, opts: W1Options) -> Result<f64> {
    segment_error_inner(qf, &qf.breakpoints(), a, b, theta, opts).ok_or(Error::IntegrationDiverged { segment: 0 })
}

fn segment_error_inner(
    qf: &QuantileFunction,
    breaks: &[f64],
    a: f64,
    b: f64,
    theta: f64,
    opts: W1Options,
) -> Option<f64> {
    let mut cuts = Vec::with_capacity(breaks.len() + 3);
    cuts.push(a);
    cuts.extend(breaks.iter().copied().filter(|&t| t > a && t < b));
    let c = crossing(qf, theta, a, b);
    if c > a && c < b {
        cuts.push(c);
    }
    cuts.push(b);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let piece_opts = W1Options { abs_tol: opts.abs_tol / (cuts.len() - 1) as f64, ..opts };
    let mut total = 0.0;
    for piece in cuts.windows(2) {
        // Evaluate strictly inside the piece: at a jump the quantile
        // function takes its left limit, which belongs to the previous piece.
        let (lo, hi) = (piece[0].next_up(), piece[1].next_down());
        if lo > hi {
            // a single ulp wide: nothing to integrate
            continue;
        }
        let integrand = |omega: f64| (qf.evaluate(omega.clamp(lo, hi)) - theta).abs();
        total += adaptive_simpson(integrand, piece[0], piece[1], piece_opts).ok()?;
    }
    Some(total)
}

/// Smallest `w` in `[a, b]` with `F^{-1}(w) >= theta`, located to within a
/// few ulps by bisection.
fn crossing(qf: &QuantileFunction, theta: f64, a: f64, b: f64) -> f64 {
    if qf.evaluate(a) >= theta {
        return a;
    }
    if qf.evaluate(b) < theta {
        return b;
    }
    let (mut lo, mut hi) = (a, b);
    for _ in 0..64 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if qf.evaluate(mid) >= theta {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

/// Quantile values minimizing the 1-Wasserstein error for fixed fractions:
/// `theta_i = F^{-1}((tau_i + tau_{i+1}) / 2)`.
pub fn optimal_values(qf: &QuantileFunction, fractions: &FractionSet) -> StaircaseApproximation {
    let values = fractions.midpoints().into_iter().map(|m| qf.evaluate(m)).collect();
    StaircaseApproximation::new(fractions.clone(), values).expect("one value per segment")
}

/// 1-Wasserstein error as a function of the fractions alone, with the
/// quantile values pinned to [`optimal_values`].
pub fn w1_of_fractions(qf: &QuantileFunction, fractions: &FractionSet, opts: W1Options) -> Result<f64> {
    w1_error_with(qf, &optimal_values(qf, fractions), opts)
}

/// `dW1/dtau_i = 2 F^{-1}(tau_i) - F^{-1}(tau_hat_i) - F^{-1}(tau_hat_{i-1})`
/// for the interior fractions `i = 1 .. N-1`, where `W1` is
/// [`w1_of_fractions`].
pub fn w1_fraction_gradient(qf: &QuantileFunction, fractions: &FractionSet) -> Vec<f64> {
    let at_midpoints: Vec<f64> = fractions.midpoints().into_iter().map(|m| qf.evaluate(m)).collect();
    fraction_gradient_from_values(fractions.interior(), &at_midpoints, |t| qf.evaluate(t))
}

/// The same gradient when the quantile function is only available through a
/// callback, as with a learned quantile value network. `at_midpoints[i]` must
/// hold `F^{-1}(tau_hat_i)`.
pub fn fraction_gradient_from_values<F>(interior: &[f64], at_midpoints: &[f64], quantile: F) -> Vec<f64>
where
    F: Fn(f64) -> f64,
{
    interior.iter().enumerate().map(|(k, &tau)| 2.0 * quantile(tau) - at_midpoints[k + 1] - at_midpoints[k]).collect()
}
