use alloc::vec::Vec;

use crate::quantile::FractionSet;
use crate::{Error, Result};

/// Threshold of the Huber quantile loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HuberParams {
    kappa: f64,
}

impl HuberParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!("kappa must be positive, got {kappa}")));
        }
        Ok(Self { kappa })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }
}

impl Default for HuberParams {
    fn default() -> Self {
        Self { kappa: 1.0 }
    }
}

#[inline]
fn asymmetry(delta: f64, tau: f64) -> f64 {
    (tau - if delta < 0.0 { 1.0 } else { 0.0 }).abs()
}

/// `rho(delta) = |tau - 1{delta < 0}| * L(delta) / kappa` with the Huber
/// loss `L` quadratic for `|delta| <= kappa` and linear beyond.
pub fn quantile_huber(delta: f64, tau: f64, params: HuberParams) -> f64 {
    let k = params.kappa;
    let a = delta.abs();
    let huber = if a <= k { 0.5 * delta * delta } else { k * (a - 0.5 * k) };
    asymmetry(delta, tau) * huber / k
}

/// Derivative of [`quantile_huber`] with respect to `delta`.
pub fn quantile_huber_derivative(delta: f64, tau: f64, params: HuberParams) -> f64 {
    let k = params.kappa;
    let slope = delta.clamp(-k, k);
    asymmetry(delta, tau) * slope / k
}

/// `delta[i][j] = r + gamma * target_next[i] - current[j]`.
pub fn td_error_matrix(r: f64, gamma: f64, target_next: &[f64], current: &[f64]) -> Result<Vec<Vec<f64>>> {
    if target_next.len() != current.len() {
        return Err(Error::LengthMismatch {
            what: "target quantiles",
            expected: current.len(),
            found: target_next.len(),
        });
    }
    Ok(target_next.iter().map(|&t| current.iter().map(|&c| r + gamma * t - c).collect()).collect())
}

fn check_shape(delta: &[Vec<f64>], midpoints: &[f64]) -> Result<()> {
    for row in delta {
        if row.len() != midpoints.len() {
            return Err(Error::LengthMismatch { what: "TD error row", expected: midpoints.len(), found: row.len() });
        }
    }
    Ok(())
}

/// `L = (1/N) sum_i sum_j rho_{tau_hat_j}(delta[i][j])`, where `N` is the
/// number of target rows and column `j` picks the fraction.
pub fn quantile_loss(delta: &[Vec<f64>], midpoints: &[f64], params: HuberParams) -> Result<f64> {
    check_shape(delta, midpoints)?;
    if delta.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = delta
        .iter()
        .map(|row| row.iter().zip(midpoints).map(|(&d, &t)| quantile_huber(d, t, params)).sum::<f64>())
        .sum();
    Ok(sum / delta.len() as f64)
}

/// Gradient of [`quantile_loss`] with respect to the current quantiles.
/// Since `delta[i][j]` depends on `current[j]` with slope -1, this is
/// `-(1/N) sum_i rho'(delta[i][j])`.
pub fn quantile_loss_gradient(delta: &[Vec<f64>], midpoints: &[f64], params: HuberParams) -> Result<Vec<f64>> {
    check_shape(delta, midpoints)?;
    let mut grad = alloc::vec![0.0; midpoints.len()];
    if delta.is_empty() {
        return Ok(grad);
    }
    let scale = 1.0 / delta.len() as f64;
    for row in delta {
        for ((g, &d), &t) in grad.iter_mut().zip(row).zip(midpoints) {
            *g -= scale * quantile_huber_derivative(d, t, params);
        }
    }
    Ok(grad)
}

/// `Q = sum_i (tau_{i+1} - tau_i) * F^{-1}(tau_hat_i)`.
pub fn action_value(fractions: &FractionSet, at_midpoints: &[f64]) -> Result<f64> {
    if at_midpoints.len() != fractions.len() {
        return Err(Error::LengthMismatch {
            what: "midpoint quantiles",
            expected: fractions.len(),
            found: at_midpoints.len(),
        });
    }
    Ok(fractions.widths().iter().zip(at_midpoints).map(|(w, q)| w * q).sum())
}
