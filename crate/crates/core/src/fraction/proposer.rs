use alloc::vec;
use alloc::vec::Vec;

use crate::quantile::FractionSet;
use crate::{Error, Result};

/// Fractions parameterized by `N` logits through a cumulative softmax:
/// `q = softmax(logits)`, `tau_i = sum_{j < i} q_j`.
///
/// Because every `q_j` is positive the fractions come out sorted, with
/// `tau_0 = 0` and `tau_N = 1`, without any explicit sort.
#[derive(Debug, Clone, PartialEq)]
pub struct FractionProposer {
    pub logits: Vec<f64>,
    /// Weight of the entropy bonus `H(q)` subtracted from the objective.
    pub entropy_coeff: f64,
}

impl FractionProposer {
    /// `n` zero logits: uniform fractions.
    pub fn uniform(n: usize, entropy_coeff: f64) -> Result<Self> {
        Self::new(vec![0.0; n], entropy_coeff)
    }

    pub fn new(logits: Vec<f64>, entropy_coeff: f64) -> Result<Self> {
        if logits.is_empty() {
            return Err(Error::InvalidFractions("need at least one logit".into()));
        }
        if !(entropy_coeff >= 0.0 && entropy_coeff.is_finite()) {
            return Err(Error::InvalidParameter(alloc::format!(
                "entropy coefficient must be non-negative, got {entropy_coeff}"
            )));
        }
        Ok(Self { logits, entropy_coeff })
    }

    pub fn len(&self) -> usize {
        self.logits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.logits.is_empty()
    }

    pub fn probabilities(&self) -> Result<Vec<f64>> {
        softmax(&self.logits)
    }

    pub fn fractions(&self) -> Result<FractionSet> {
        fractions_from_logits(&self.logits)
    }

    pub fn entropy(&self) -> Result<f64> {
        entropy(&self.logits)
    }

    /// Gradient of `sum_i g_i tau_i - entropy_coeff * H(q)` with respect to
    /// the logits, where `g = tau_grad` holds one entry per interior fraction.
    pub fn logit_gradient(&self, tau_grad: &[f64]) -> Result<Vec<f64>> {
        logit_gradient(&self.logits, tau_grad, self.entropy_coeff)
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Result<Vec<f64>> {
    let (log_q, _) = log_softmax(logits)?;
    Ok(log_q.into_iter().map(libm::exp).collect())
}

fn log_softmax(logits: &[f64]) -> Result<(Vec<f64>, f64)> {
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFiniteLogits);
    }
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let log_norm = libm::log(logits.iter().map(|&l| libm::exp(l - max)).sum::<f64>());
    Ok((logits.iter().map(|&l| l - max - log_norm).collect(), max))
}

/// Cumulative-softmax fraction set. Fails only on non-finite logits.
///
/// A probability can underflow below the spacing of `f64` near its running
/// sum, which would make two fractions coincide. Such boundaries are nudged
/// to the next representable value, so the result is strictly increasing for
/// every finite input; the nudge is at most one ulp per collapsed segment.
pub fn fractions_from_logits(logits: &[f64]) -> Result<FractionSet> {
    if logits.is_empty() {
        return Err(Error::InvalidFractions("need at least one logit".into()));
    }
    let q = softmax(logits)?;
    let mut bounds = Vec::with_capacity(q.len() + 1);
    let mut acc = 0.0;
    bounds.push(0.0);
    for &qi in &q[..q.len() - 1] {
        acc += qi;
        let prev = bounds[bounds.len() - 1];
        bounds.push(if acc > prev { acc } else { f64::next_up(prev) });
    }
    bounds.push(1.0);
    for i in (1..bounds.len() - 1).rev() {
        if bounds[i] >= bounds[i + 1] {
            bounds[i] = f64::next_down(bounds[i + 1]);
        }
    }
    FractionSet::from_bounds(bounds)
}

/// `H(q) = -sum q_i ln q_i` of the softmax probabilities.
pub fn entropy(logits: &[f64]) -> Result<f64> {
    let (log_q, _) = log_softmax(logits)?;
    Ok(-log_q.iter().map(|&lq| libm::exp(lq) * lq).sum::<f64>())
}

/// Gradient of `sum_i g_i tau_i - entropy_coeff * H(q)` with respect to the
/// logits, using `d tau_i / d l_k = q_k (1{k < i} - tau_i)` and
/// `d H / d l_k = -q_k (ln q_k + H)`.
pub fn logit_gradient(logits: &[f64], tau_grad: &[f64], entropy_coeff: f64) -> Result<Vec<f64>> {
    let n = logits.len();
    if tau_grad.len() + 1 != n {
        return Err(Error::LengthMismatch {
            what: "fraction gradient",
            expected: n.saturating_sub(1),
            found: tau_grad.len(),
        });
    }
    let (log_q, _) = log_softmax(logits)?;
    let q: Vec<f64> = log_q.iter().map(|&lq| libm::exp(lq)).collect();
    let h = -q.iter().zip(&log_q).map(|(qi, lq)| qi * lq).sum::<f64>();

    // tau_grad[i - 1] belongs to tau_i, i = 1..n-1
    let mut weighted = 0.0;
    let mut tau = 0.0;
    for (i, g) in tau_grad.iter().enumerate() {
        tau += q[i];
        weighted += g * tau;
    }

    // suffix[k] = sum over interior i > k of g_i
    let mut out = vec![0.0; n];
    let mut suffix = 0.0;
    for k in (0..n).rev() {
        out[k] = q[k] * (suffix - weighted) + entropy_coeff * q[k] * (log_q[k] + h);
        if k >= 1 {
            suffix += tau_grad[k - 1];
        }
    }
    Ok(out)
}
