use alloc::format;
use alloc::vec::Vec;

use super::normal;
use crate::{Error, Result};

/// Fractions of unbounded quantile functions are clamped to
/// `[TAIL_EPS, 1 - TAIL_EPS]` before evaluation.
pub const TAIL_EPS: f64 = 1e-6;

/// A ground-truth inverse CDF `p -> F^{-1}(p)` on `[0, 1]`.
///
/// Every variant is non-decreasing in `p`. Gaussian and exponential
/// quantiles diverge at the ends of the unit interval, so queries to them
/// are clamped to `[TAIL_EPS, 1 - TAIL_EPS]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFunction {
    kind: Kind,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Uniform {
        lo: f64,
        hi: f64,
    },
    Gaussian {
        mean: f64,
        std_dev: f64,
    },
    Exponential {
        rate: f64,
    },
    TruncatedGaussian {
        mean: f64,
        std_dev: f64,
        cdf_lo: f64,
        cdf_hi: f64,
    },
    /// Finite mixture of point masses; `cumulative[k] = P(Z <= values[k])`.
    Discrete {
        values: Vec<f64>,
        cumulative: Vec<f64>,
    },
    /// Sorted samples at plotting positions `k / (n - 1)`.
    Empirical(Vec<f64>),
    Tabular {
        fractions: Vec<f64>,
        values: Vec<f64>,
    },
}

fn finite(name: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{name} must be finite, got {x}")))
    }
}

impl QuantileFunction {
    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        let (lo, hi) = (finite("lo", lo)?, finite("hi", hi)?);
        if lo > hi {
            return Err(Error::InvalidParameter(format!("uniform needs lo <= hi, got [{lo}, {hi}]")));
        }
        Ok(Self { kind: Kind::Uniform { lo, hi } })
    }

    pub fn gaussian(mean: f64, std_dev: f64) -> Result<Self> {
        let (mean, std_dev) = (finite("mean", mean)?, finite("std_dev", std_dev)?);
        if std_dev <= 0.0 {
            return Err(Error::InvalidParameter(format!("std_dev must be positive, got {std_dev}")));
        }
        Ok(Self { kind: Kind::Gaussian { mean, std_dev } })
    }

    pub fn exponential(rate: f64) -> Result<Self> {
        let rate = finite("rate", rate)?;
        if rate <= 0.0 {
            return Err(Error::InvalidParameter(format!("rate must be positive, got {rate}")));
        }
        Ok(Self { kind: Kind::Exponential { rate } })
    }

    /// Gaussian restricted to `[lo, hi]` and renormalized.
    pub fn truncated_gaussian(mean: f64, std_dev: f64, lo: f64, hi: f64) -> Result<Self> {
        let (mean, std_dev) = (finite("mean", mean)?, finite("std_dev", std_dev)?);
        let (lo, hi) = (finite("lo", lo)?, finite("hi", hi)?);
        if std_dev <= 0.0 {
            return Err(Error::InvalidParameter(format!("std_dev must be positive, got {std_dev}")));
        }
        let cdf_lo = normal::cdf((lo - mean) / std_dev);
        let cdf_hi = normal::cdf((hi - mean) / std_dev);
        if !(cdf_hi - cdf_lo > 1e-12) {
            return Err(Error::InvalidParameter(format!("truncation window [{lo}, {hi}] carries no probability mass")));
        }
        Ok(Self { kind: Kind::TruncatedGaussian { mean, std_dev, cdf_lo, cdf_hi } })
    }

    /// `low` with probability `p_low`, `high` otherwise.
    pub fn two_point(low: f64, p_low: f64, high: f64) -> Result<Self> {
        let p_low = finite("p_low", p_low)?;
        if !(p_low > 0.0 && p_low < 1.0) {
            return Err(Error::InvalidParameter(format!("p_low must lie in (0, 1), got {p_low}")));
        }
        Self::discrete(&[(low, p_low), (high, 1.0 - p_low)])
    }

    /// Finite mixture of point masses given as `(value, probability)` pairs.
    /// Probabilities must be positive and sum to one within `1e-9`; equal
    /// values are merged.
    pub fn discrete(atoms: &[(f64, f64)]) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidParameter("discrete distribution needs at least one atom".into()));
        }
        let mut sorted = Vec::with_capacity(atoms.len());
        for &(v, p) in atoms {
            let (v, p) = (finite("atom value", v)?, finite("atom probability", p)?);
            if p <= 0.0 {
                return Err(Error::InvalidParameter(format!("atom probability must be positive, got {p}")));
            }
            sorted.push((v, p));
        }
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        let total: f64 = sorted.iter().map(|a| a.1).sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParameter(format!("atom probabilities sum to {total}, expected 1")));
        }

        let mut values: Vec<f64> = Vec::new();
        let mut cumulative: Vec<f64> = Vec::new();
        let mut acc = 0.0;
        for (v, p) in sorted {
            acc += p / total;
            match values.last() {
                Some(&last) if last == v => *cumulative.last_mut().unwrap() = acc,
                _ => {
                    values.push(v);
                    cumulative.push(acc);
                }
            }
        }
        *cumulative.last_mut().unwrap() = 1.0;
        Ok(Self { kind: Kind::Discrete { values, cumulative } })
    }

    /// Sorted-sample inverse CDF, linear between order statistics placed at
    /// plotting positions `k / (n - 1)`.
    pub fn empirical(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptySamples);
        }
        let mut sorted = Vec::with_capacity(samples.len());
        for &s in samples {
            sorted.push(finite("sample", s)?);
        }
        sorted.sort_by(f64::total_cmp);
        Ok(Self { kind: Kind::Empirical(sorted) })
    }

    /// Piecewise-linear quantile function through `(fraction, value)` knots.
    /// Knot fractions must be strictly increasing from exactly 0 to exactly 1,
    /// values non-decreasing.
    pub fn tabular(knots: &[(f64, f64)]) -> Result<Self> {
        if knots.len() < 2 {
            return Err(Error::InvalidParameter("tabular quantile function needs at least two knots".into()));
        }
        let mut fractions = Vec::with_capacity(knots.len());
        let mut values = Vec::with_capacity(knots.len());
        for &(p, v) in knots {
            fractions.push(finite("knot fraction", p)?);
            values.push(finite("knot value", v)?);
        }
        if fractions[0] != 0.0 || fractions[fractions.len() - 1] != 1.0 {
            return Err(Error::InvalidParameter("tabular knots must span [0, 1] exactly".into()));
        }
        if fractions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("tabular knot fractions must be strictly increasing".into()));
        }
        if values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidParameter("tabular knot values must be non-decreasing".into()));
        }
        Ok(Self { kind: Kind::Tabular { fractions, values } })
    }

    /// True for kinds whose quantile diverges at 0 or 1.
    pub fn is_unbounded(&self) -> bool {
        matches!(self.kind, Kind::Gaussian { .. } | Kind::Exponential { .. })
    }

    /// True when the quantile function is continuous on `[0, 1]`.
    pub fn is_continuous(&self) -> bool {
        match &self.kind {
            Kind::Discrete { values, .. } => values.len() == 1,
            _ => true,
        }
    }

    /// `F^{-1}(p)`. `p` is clamped into `[0, 1]`, and further into
    /// `[TAIL_EPS, 1 - TAIL_EPS]` for unbounded kinds.
    pub fn evaluate(&self, p: f64) -> f64 {
        let p = p.clamp(0.0, 1.0);
        match &self.kind {
            Kind::Uniform { lo, hi } => lo + (hi - lo) * p,
            Kind::Gaussian { mean, std_dev } => mean + std_dev * normal::inverse_cdf(p.clamp(TAIL_EPS, 1.0 - TAIL_EPS)),
            Kind::Exponential { rate } => -libm::log1p(-p.clamp(TAIL_EPS, 1.0 - TAIL_EPS)) / rate,
            Kind::TruncatedGaussian { mean, std_dev, cdf_lo, cdf_hi } => {
                let u = cdf_lo + p * (cdf_hi - cdf_lo);
                mean + std_dev * normal::inverse_cdf(u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
            }
            Kind::Discrete { values, cumulative } => {
                // smallest atom with P(Z <= v) >= p
                let k = cumulative.partition_point(|&c| c < p);
                values[k.min(values.len() - 1)]
            }
            Kind::Empirical(sorted) => interpolate_uniform_grid(sorted, p),
            Kind::Tabular { fractions, values } => {
                let k = fractions.partition_point(|&f| f <= p);
                if k == 0 {
                    return values[0];
                }
                if k >= fractions.len() {
                    return values[values.len() - 1];
                }
                let (f0, f1) = (fractions[k - 1], fractions[k]);
                let t = (p - f0) / (f1 - f0);
                values[k - 1] + t * (values[k] - values[k - 1])
            }
        }
    }

    /// Fractions in `(0, 1)` where the quantile function jumps or changes
    /// definition abruptly (atom boundaries, tail clamps). Integrators split
    /// there so every piece they see is continuous.
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Discrete { cumulative, .. } => cumulative[..cumulative.len() - 1].to_vec(),
            Kind::Gaussian { .. } | Kind::Exponential { .. } => {
                alloc::vec![TAIL_EPS, 1.0 - TAIL_EPS]
            }
            _ => Vec::new(),
        }
    }

    /// Mean of the distribution underlying the (clamped) quantile function,
    /// when it has a closed form.
    pub fn mean(&self) -> Option<f64> {
        match &self.kind {
            Kind::Uniform { lo, hi } => Some(0.5 * (lo + hi)),
            Kind::Gaussian { mean, .. } => Some(*mean),
            Kind::Exponential { rate } => Some(1.0 / rate),
            Kind::Discrete { values, cumulative } => {
                let mut prev = 0.0;
                Some(values.iter().zip(cumulative).fold(0.0, |acc, (v, &c)| {
                    let w = c - prev;
                    prev = c;
                    acc + w * v
                }))
            }
            Kind::Empirical(s) => Some(s.iter().sum::<f64>() / s.len() as f64),
            _ => None,
        }
    }
}

fn interpolate_uniform_grid(sorted: &[f64], p: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let pos = p * (n - 1) as f64;
    let k = (libm::floor(pos) as usize).min(n - 2);
    let t = pos - k as f64;
    sorted[k] + t * (sorted[k + 1] - sorted[k])
}
