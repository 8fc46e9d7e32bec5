//! Quantile functions, fraction sets, staircase approximations and their
//! 1-Wasserstein geometry.

mod fractions;
mod function;
pub mod normal;
mod wasserstein;

pub use fractions::{project_cdf, FractionSet, StaircaseApproximation};
pub use function::{QuantileFunction, TAIL_EPS};
pub use wasserstein::{
    fraction_gradient_from_values, optimal_values, segment_error, w1_error, w1_error_with, w1_fraction_gradient,
    w1_of_fractions, W1Options,
};

use crate::Result;

/// Empirical quantile function of a sample, linear between order statistics.
pub fn empirical_quantile_from_samples(samples: &[f64]) -> Result<QuantileFunction> {
    QuantileFunction::empirical(samples)
}
