use alloc::format;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Quantile fractions `0 = tau_0 < tau_1 < ... < tau_N = 1`.
///
/// Only the `N - 1` interior fractions are free; the endpoints are implied.
/// Segment `i` is `[tau_i, tau_{i+1})` and has midpoint
/// `tau_hat_i = (tau_i + tau_{i+1}) / 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionSet {
    /// All `N + 1` boundaries including the two endpoints.
    bounds: Vec<f64>,
}

impl FractionSet {
    /// Builds a set from its interior fractions, which must be strictly
    /// increasing and lie strictly inside `(0, 1)`.
    pub fn new(interior: &[f64]) -> Result<Self> {
        let mut bounds = Vec::with_capacity(interior.len() + 2);
        bounds.push(0.0);
        bounds.extend_from_slice(interior);
        bounds.push(1.0);
        Self::from_bounds(bounds)
    }

    /// Builds a set from all `N + 1` boundaries.
    pub fn from_bounds(bounds: Vec<f64>) -> Result<Self> {
        if bounds.len() < 2 {
            return Err(Error::InvalidFractions("need at least one segment".into()));
        }
        if bounds[0] != 0.0 || bounds[bounds.len() - 1] != 1.0 {
            return Err(Error::InvalidFractions("boundaries must start at 0 and end at 1".into()));
        }
        for (i, w) in bounds.windows(2).enumerate() {
            if !(w[0] < w[1]) {
                return Err(Error::InvalidFractions(format!(
                    "tau_{} = {} is not below tau_{} = {}",
                    i,
                    w[0],
                    i + 1,
                    w[1]
                )));
            }
        }
        Ok(Self { bounds })
    }

    /// `n` equally spaced segments, `tau_i = i / n`.
    pub fn equally_spaced(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidFractions("need at least one segment".into()));
        }
        let mut bounds: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        bounds[n] = 1.0;
        Self::from_bounds(bounds)
    }

    /// Number of segments `N`.
    pub fn len(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `tau_0 ..= tau_N`.
    pub fn bounds(&self) -> &[f64] {
        &self.bounds
    }

    /// `tau_1 .. tau_{N-1}`.
    pub fn interior(&self) -> &[f64] {
        &self.bounds[1..self.bounds.len() - 1]
    }

    pub fn midpoints(&self) -> Vec<f64> {
        self.bounds.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }

    /// Segment widths `tau_{i+1} - tau_i`; these are the Dirac weights.
    pub fn widths(&self) -> Vec<f64> {
        self.bounds.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn min_width(&self) -> f64 {
        self.bounds.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// Index of the segment containing `omega`, right-continuous: a
    /// boundary `tau_i` belongs to segment `i`, and `omega = 1` belongs to
    /// the last segment.
    pub fn segment_of(&self, omega: f64) -> usize {
        self.interior().partition_point(|&t| t <= omega)
    }
}

/// `N` quantile values on a [`FractionSet`]: the staircase quantile function
/// of the Dirac mixture `sum_i (tau_{i+1} - tau_i) delta_{theta_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StaircaseApproximation {
    fractions: FractionSet,
    values: Vec<f64>,
}

impl StaircaseApproximation {
    pub fn new(fractions: FractionSet, values: Vec<f64>) -> Result<Self> {
        if values.len() != fractions.len() {
            return Err(Error::LengthMismatch {
                what: "staircase values",
                expected: fractions.len(),
                found: values.len(),
            });
        }
        Ok(Self { fractions, values })
    }

    pub fn fractions(&self) -> &FractionSet {
        &self.fractions
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_parts(self) -> (FractionSet, Vec<f64>) {
        (self.fractions, self.values)
    }

    /// The staircase quantile function at `omega`: `theta_i` for the unique
    /// segment with `tau_i <= omega < tau_{i+1}` (Heaviside convention
    /// `H(0) = 1`).
    pub fn project(&self, omega: f64) -> f64 {
        self.values[self.fractions.segment_of(omega)]
    }

    /// Mean of the Dirac mixture.
    pub fn mean(&self) -> f64 {
        self.fractions.widths().iter().zip(&self.values).map(|(w, v)| w * v).sum()
    }
}

/// Alias used in operation-level docs and the CLI.
pub fn project_cdf(approx: &StaircaseApproximation, omega: f64) -> f64 {
    approx.project(omega)
}
