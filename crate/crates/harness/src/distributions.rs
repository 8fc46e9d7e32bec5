//! Named target distributions for the approximation benchmarks.

use fqf_core::QuantileFunction;

use crate::error::{HarnessError, Result};

/// Registry names, in the order used by the default benchmark suite.
pub const KNOWN: &[&str] = &["two-point", "three-point", "uniform", "truncated-gaussian", "exponential", "gaussian"];

/// The five-target approximation suite.
pub const SUITE: &[&str] = &["two-point", "three-point", "uniform", "truncated-gaussian", "exponential"];

/// Looks up a target by name.
///
/// The two-point target puts mass 0.3 on 0 so that its jump never lands on
/// an equally spaced grid of 4, 8 or 32 segments. The unbounded targets are
/// evaluated with clamped tails.
pub fn by_name(name: &str) -> Result<QuantileFunction> {
    let qf = match name {
        "two-point" => QuantileFunction::two_point(0.0, 0.3, 1.0),
        "three-point" => QuantileFunction::discrete(&[(0.0, 0.2), (1.0, 0.5), (3.0, 0.3)]),
        "uniform" => QuantileFunction::uniform(0.0, 1.0),
        "truncated-gaussian" => QuantileFunction::truncated_gaussian(0.0, 1.0, -2.0, 2.0),
        "exponential" => QuantileFunction::exponential(1.0),
        "gaussian" => QuantileFunction::gaussian(0.0, 1.0),
        _ => {
            return Err(HarnessError::Config(format!(
                "unknown distribution {name:?}; known distributions: {}",
                KNOWN.join(", ")
            )))
        }
    };
    Ok(qf?)
}
