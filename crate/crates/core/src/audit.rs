//! Finite-difference audits of the analytic gradients: the fraction gradient
//! of the 1-Wasserstein error and the value network's backpropagation.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::net::{quantile_loss, quantile_loss_gradient, td_error_matrix, HuberParams, NetShape, QuantileValueNet};
use crate::quantile::{w1_fraction_gradient, w1_of_fractions, FractionSet, QuantileFunction, W1Options};
use crate::Result;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-5;

/// Gradients smaller than this are compared absolutely rather than relatively.
pub const REL_FLOOR: f64 = 1e-6;

/// Quadrature tolerances for differencing W1. The default 1e-8 per segment
/// would swamp a difference quotient with step 1e-5.
pub const FD_W1_OPTIONS: W1Options = W1Options { abs_tol: 1e-12, max_depth: 60 };

/// `|a - n| / max(|a|, |n|, REL_FLOOR)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditCase {
    pub label: String,
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
    pub rel_error: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AuditReport {
    pub cases: Vec<AuditCase>,
    /// Parameters skipped because a finite-difference probe crossed a kink.
    pub skipped: usize,
    /// Largest analytic gradient magnitude seen, compared or not.
    pub max_abs_gradient: f64,
}

impl AuditReport {
    /// Zero for an empty report.
    pub fn max_rel_error(&self) -> f64 {
        self.cases.iter().map(|c| c.rel_error).fold(0.0, f64::max)
    }

    pub fn passed(&self, tol: f64) -> bool {
        self.max_rel_error() < tol
    }
}

/// A random continuous target: uniform, gaussian, exponential, truncated
/// gaussian or a piecewise-linear table.
pub fn random_continuous_target<R: Rng + ?Sized>(rng: &mut R) -> Result<(String, QuantileFunction)> {
    Ok(match rng.random_range(0..5) {
        0 => {
            let lo = rng.random_range(-2.0..1.0);
            let hi = lo + rng.random_range(0.5..3.0);
            (alloc::format!("uniform({lo:.3},{hi:.3})"), QuantileFunction::uniform(lo, hi)?)
        }
        1 => {
            let mean = rng.random_range(-1.0..1.0);
            let sd = rng.random_range(0.3..2.0);
            (alloc::format!("gaussian({mean:.3},{sd:.3})"), QuantileFunction::gaussian(mean, sd)?)
        }
        2 => {
            let rate = rng.random_range(0.5..3.0);
            (alloc::format!("exponential({rate:.3})"), QuantileFunction::exponential(rate)?)
        }
        3 => {
            let half = rng.random_range(1.0..3.0);
            (
                alloc::format!("truncated-gaussian(0,1,+-{half:.3})"),
                QuantileFunction::truncated_gaussian(0.0, 1.0, -half, half)?,
            )
        }
        _ => {
            let mut knots = vec![(0.0, rng.random_range(-1.0..0.0))];
            for p in [0.3, 0.6] {
                let prev = knots.last().unwrap().1;
                knots.push((p, prev + rng.random_range(0.0..2.0)));
            }
            let prev = knots.last().unwrap().1;
            knots.push((1.0, prev + rng.random_range(0.0..2.0)));
            (String::from("tabular"), QuantileFunction::tabular(&knots)?)
        }
    })
}

/// `n - 1` sorted interior fractions in `[0.02, 0.98]`, at least 0.01 apart.
pub fn random_fractions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<FractionSet> {
    loop {
        let mut interior: Vec<f64> = (1..n).map(|_| rng.random_range(0.02..0.98)).collect();
        interior.sort_by(f64::total_cmp);
        let gaps_ok = interior.windows(2).all(|w| w[1] - w[0] >= 0.01);
        if gaps_ok {
            return FractionSet::new(&interior);
        }
    }
}

/// Compares the closed-form fraction gradient with central differences of
/// W1 at `pairs` random (target, fractions) pairs with `N` in `2..=8`.
/// `flip_sign` negates the analytic gradient, as a negative control.
pub fn fraction_gradient_audit(pairs: usize, seed: u64, flip_sign: bool) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = AuditReport::default();
    for _ in 0..pairs {
        let (label, qf) = random_continuous_target(&mut rng)?;
        let n = rng.random_range(2..=8);
        let fractions = random_fractions(n, &mut rng)?;
        let analytic = w1_fraction_gradient(&qf, &fractions);
        let interior = fractions.interior().to_vec();
        for (i, &g) in analytic.iter().enumerate() {
            let w1_at = |t: f64| {
                let mut moved = interior.clone();
                moved[i] = t;
                w1_of_fractions(&qf, &FractionSet::new(&moved)?, FD_W1_OPTIONS)
            };
            let numeric = (w1_at(interior[i] + FD_STEP)? - w1_at(interior[i] - FD_STEP)?) / (2.0 * FD_STEP);
            let analytic = if flip_sign { -g } else { g };
            report.max_abs_gradient = report.max_abs_gradient.max(g.abs());
            report.cases.push(AuditCase {
                label: label.clone(),
                index: i,
                analytic,
                numeric,
                rel_error: relative_error(analytic, numeric),
            });
        }
    }
    Ok(report)
}

/// A random regression batch for a network of the given shape.
#[derive(Debug, Clone)]
pub struct RegressionBatch {
    pub states: Vec<Vec<f64>>,
    pub taus: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub targets: Vec<Vec<f64>>,
}

impl RegressionBatch {
    pub fn random<R: Rng + ?Sized>(shape: NetShape, size: usize, n_taus: usize, rng: &mut R) -> Self {
        let mut batch = Self { states: vec![], taus: vec![], actions: vec![], targets: vec![] };
        for _ in 0..size {
            batch.states.push((0..shape.state_dim).map(|_| rng.random_range(-1.0..1.0)).collect());
            let mut taus: Vec<f64> = (0..n_taus).map(|_| rng.random::<f64>()).collect();
            taus.sort_by(f64::total_cmp);
            batch.taus.push(taus);
            batch.actions.push(rng.random_range(0..shape.n_actions));
            batch.targets.push((0..n_taus).map(|_| rng.random_range(-2.0..2.0)).collect());
        }
        batch
    }

    /// Summed quantile regression loss of `net` on the batch.
    pub fn loss(&self, net: &QuantileValueNet, huber: HuberParams) -> Result<f64> {
        let mut total = 0.0;
        for b in 0..self.states.len() {
            let current = net.quantiles(&self.states[b], &self.taus[b], self.actions[b])?;
            total += quantile_loss(&td_error_matrix(0.0, 1.0, &self.targets[b], &current)?, &self.taus[b], huber)?;
        }
        Ok(total)
    }

    /// Backpropagated gradient of [`RegressionBatch::loss`].
    pub fn gradient(&self, net: &QuantileValueNet, huber: HuberParams) -> Result<Vec<f64>> {
        let n_actions = net.shape().n_actions;
        let mut grad = vec![0.0; net.params().len()];
        for b in 0..self.states.len() {
            let cache = net.forward(&self.states[b], &self.taus[b])?;
            let current: Vec<f64> = cache.outputs.iter().map(|o| o[self.actions[b]]).collect();
            let delta = td_error_matrix(0.0, 1.0, &self.targets[b], &current)?;
            let dq = quantile_loss_gradient(&delta, &self.taus[b], huber)?;
            let upstream: Vec<Vec<f64>> = dq
                .iter()
                .map(|&g| {
                    let mut row = vec![0.0; n_actions];
                    row[self.actions[b]] = g;
                    row
                })
                .collect();
            net.accumulate_gradient(&cache, &upstream, &mut grad)?;
        }
        Ok(grad)
    }

    /// Which side of every non-smooth point the batch sits on: ReLU units,
    /// and the sign and Huber branch of each TD error.
    fn kink_pattern(&self, net: &QuantileValueNet, huber: HuberParams) -> Result<Vec<bool>> {
        let mut pattern = Vec::new();
        for b in 0..self.states.len() {
            let cache = net.forward(&self.states[b], &self.taus[b])?;
            pattern.extend(cache.activation_pattern());
            let current: Vec<f64> = cache.outputs.iter().map(|o| o[self.actions[b]]).collect();
            for d in td_error_matrix(0.0, 1.0, &self.targets[b], &current)?.into_iter().flatten() {
                pattern.push(d < 0.0);
                pattern.push(d.abs() <= huber.kappa());
            }
        }
        Ok(pattern)
    }
}

/// Compares backpropagated gradients of the quantile regression loss with
/// central differences on `nets` random networks (`d = 8`, 16 cosine terms,
/// two actions), probing `params_per_net` random parameters each.
/// Parameters whose probe crosses a ReLU kink or a kink of the loss are
/// skipped. `zero_params` audits an all-zero network against all-zero
/// targets instead: every gradient vanishes and every TD error sits on the
/// loss kink, so most probes are skipped and the rest compare zero with zero.
pub fn backprop_audit(
    nets: usize,
    params_per_net: usize,
    seed: u64,
    flip_sign: bool,
    zero_params: bool,
) -> Result<AuditReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = NetShape { state_dim: 4, hidden: 8, n_basis: 16, n_actions: 2 };
    let huber = HuberParams::new(1.0)?;
    let mut report = AuditReport::default();
    for net_index in 0..nets {
        let mut net = QuantileValueNet::new(shape, &mut rng)?;
        if zero_params {
            net.params_mut().fill(0.0);
        }
        let mut batch = RegressionBatch::random(shape, 3, 4, &mut rng);
        if zero_params {
            batch.targets.iter_mut().for_each(|t| t.fill(0.0));
        }
        let grad = batch.gradient(&net, huber)?;
        let base_pattern = batch.kink_pattern(&net, huber)?;
        report.max_abs_gradient = grad.iter().fold(report.max_abs_gradient, |m, g| m.max(g.abs()));
        for _ in 0..params_per_net {
            let k = rng.random_range(0..grad.len());
            let probe = |delta: f64| -> Result<(f64, bool)> {
                let mut moved = net.clone();
                moved.params_mut()[k] += delta;
                Ok((batch.loss(&moved, huber)?, batch.kink_pattern(&moved, huber)? == base_pattern))
            };
            let (up, same_up) = probe(FD_STEP)?;
            let (dn, same_dn) = probe(-FD_STEP)?;
            if !(same_up && same_dn) {
                report.skipped += 1;
                continue;
            }
            let numeric = (up - dn) / (2.0 * FD_STEP);
            let analytic = if flip_sign { -grad[k] } else { grad[k] };
            report.cases.push(AuditCase {
                label: alloc::format!("net{net_index}"),
                index: k,
                analytic,
                numeric,
                rel_error: relative_error(analytic, numeric),
            });
        }
    }
    Ok(report)
}
