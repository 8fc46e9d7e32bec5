use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::mdp::{Policy, ToyMdp};
use super::replay::Transition;
use crate::fraction::{fractions_from_logits, logit_gradient};
use crate::net::{
    action_value, quantile_loss, quantile_loss_gradient, td_error_matrix, HuberParams, NetShape, QuantileValueNet,
};
use crate::optim::{AdamState, OptimizerState};
use crate::quantile::{fraction_gradient_from_values, FractionSet};
use crate::{Error, Result};

/// How an agent picks its quantile fractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentKind {
    /// Fractions proposed per state-action and trained to minimize W1.
    Fqf,
    /// Equally spaced fractions.
    FixedFraction,
    /// Fresh sorted uniform fractions for every update.
    SampledFraction,
}

impl AgentKind {
    pub const ALL: [AgentKind; 3] = [AgentKind::Fqf, AgentKind::FixedFraction, AgentKind::SampledFraction];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Fqf => "fqf",
            AgentKind::FixedFraction => "fixed",
            AgentKind::SampledFraction => "sampled",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AgentConfig {
    pub kind: AgentKind,
    /// Number of fractions `N`.
    pub n_fractions: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub epsilon_train: f64,
    pub epsilon_eval: f64,
    /// Adam step size for the quantile value network.
    pub value_lr: f64,
    /// RMSProp step size for the fraction proposer. Zero freezes it.
    pub fraction_lr: f64,
    /// Updates between copies of the online network into the target network.
    pub target_sync: u64,
    pub entropy_coeff: f64,
    pub hidden: usize,
    pub n_basis: usize,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            kind: AgentKind::Fqf,
            n_fractions: 32,
            kappa: 1.0,
            gamma: 0.99,
            epsilon_train: 0.01,
            epsilon_eval: 0.001,
            value_lr: 1e-3,
            fraction_lr: 1e-7,
            target_sync: 100,
            entropy_coeff: 0.001,
            hidden: 64,
            n_basis: 64,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: alloc::string::String| Err(Error::InvalidConfig(msg));
        if self.n_fractions == 0 {
            return bad("n_fractions must be at least 1".into());
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return bad(format!("kappa must be positive, got {}", self.kappa));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad(format!("gamma must lie in [0, 1], got {}", self.gamma));
        }
        for (name, eps) in [("epsilon_train", self.epsilon_train), ("epsilon_eval", self.epsilon_eval)] {
            if !(0.0..=1.0).contains(&eps) {
                return bad(format!("{name} must lie in [0, 1], got {eps}"));
            }
        }
        if !(self.value_lr > 0.0 && self.value_lr.is_finite()) {
            return bad(format!("value_lr must be positive, got {}", self.value_lr));
        }
        if !(self.fraction_lr >= 0.0 && self.fraction_lr.is_finite()) {
            return bad(format!("fraction_lr must be non-negative, got {}", self.fraction_lr));
        }
        if !(self.entropy_coeff >= 0.0 && self.entropy_coeff.is_finite()) {
            return bad(format!("entropy_coeff must be non-negative, got {}", self.entropy_coeff));
        }
        if self.target_sync == 0 || self.hidden == 0 || self.n_basis == 0 {
            return bad("target_sync, hidden and n_basis must be positive".into());
        }
        Ok(())
    }
}

/// Per-update diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UpdateDiagnostics {
    /// Batch mean of the quantile regression loss.
    pub loss: f64,
    /// Mean `|dW1/dtau_i|` over the batch (zero for baselines).
    pub mean_tau_grad: f64,
    /// Share of current quantile vectors in the batch that decrease somewhere.
    pub non_monotone: f64,
}

/// `r + gamma * next`, or all `r` at a terminal transition.
pub fn bellman_target(reward: f64, gamma: f64, terminal: bool, next_quantiles: &[f64]) -> Vec<f64> {
    if terminal {
        vec![reward; next_quantiles.len()]
    } else {
        next_quantiles.iter().map(|&z| reward + gamma * z).collect()
    }
}

/// Greedy action (lowest index among ties) with probability `1 - epsilon`,
/// uniform otherwise.
pub fn epsilon_greedy<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
    if q_values.is_empty() {
        return Err(Error::EmptyActions);
    }
    let explore: f64 = rng.random();
    if explore < epsilon {
        return Ok(rng.random_range(0..q_values.len()));
    }
    Ok(argmax(q_values))
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (a, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = a;
        }
    }
    best
}

/// Per-action affine map from state features to `N` logits.
#[derive(Debug, Clone, PartialEq)]
struct ProposerHead {
    n: usize,
    hidden: usize,
    /// `[action][k][j]` weights followed by `[action][k]` biases.
    params: Vec<f64>,
}

impl ProposerHead {
    fn zeros(n_actions: usize, n: usize, hidden: usize) -> Self {
        Self { n, hidden, params: vec![0.0; n_actions * n * (hidden + 1)] }
    }

    fn bias_offset(&self) -> usize {
        self.params.len() / (self.hidden + 1) * self.hidden
    }

    fn logits(&self, psi: &[f64], action: usize) -> Vec<f64> {
        let b0 = self.bias_offset();
        (0..self.n)
            .map(|k| {
                let row = (action * self.n + k) * self.hidden;
                self.params[b0 + action * self.n + k]
                    + self.params[row..row + self.hidden].iter().zip(psi).map(|(w, x)| w * x).sum::<f64>()
            })
            .collect()
    }

    fn accumulate(&self, psi: &[f64], action: usize, logit_grad: &[f64], scale: f64, grad: &mut [f64]) {
        let b0 = self.bias_offset();
        for (k, &g) in logit_grad.iter().enumerate() {
            let row = (action * self.n + k) * self.hidden;
            for (gw, &x) in grad[row..row + self.hidden].iter_mut().zip(psi) {
                *gw += scale * g * x;
            }
            grad[b0 + action * self.n + k] += scale * g;
        }
    }
}

/// A distributional agent: quantile value network, its target copy and,
/// for [`AgentKind::Fqf`], a fraction proposer head.
#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    huber: HuberParams,
    net: QuantileValueNet,
    target: QuantileValueNet,
    proposer: Option<ProposerHead>,
    value_opt: AdamState,
    fraction_opt: Option<OptimizerState>,
    rng: ChaCha8Rng,
    updates: u64,
}

impl Agent {
    pub fn new(config: AgentConfig, state_dim: usize, n_actions: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = NetShape { state_dim, hidden: config.hidden, n_basis: config.n_basis, n_actions };
        let net = QuantileValueNet::new(shape, &mut rng)?;
        let proposer =
            (config.kind == AgentKind::Fqf).then(|| ProposerHead::zeros(n_actions, config.n_fractions, config.hidden));
        let fraction_opt = if config.kind == AgentKind::Fqf && config.fraction_lr > 0.0 {
            Some(OptimizerState::rmsprop(config.fraction_lr)?)
        } else {
            None
        };
        Ok(Self {
            huber: HuberParams::new(config.kappa)?,
            value_opt: AdamState::new(config.value_lr),
            target: net.clone(),
            net,
            proposer,
            fraction_opt,
            rng,
            updates: 0,
            config,
        })
    }

    /// Agent for `mdp` with its own discount.
    pub fn for_mdp(mut config: AgentConfig, mdp: &ToyMdp, seed: u64) -> Result<Self> {
        config.gamma = mdp.gamma();
        Self::new(config, mdp.state_dim(), mdp.n_actions(), seed)
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn net(&self) -> &QuantileValueNet {
        &self.net
    }

    pub fn target_net(&self) -> &QuantileValueNet {
        &self.target
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    /// Zeroes the output head of both networks.
    pub fn zero_head(&mut self) {
        self.net.zero_head();
        self.target.zero_head();
    }

    /// Flat proposer parameters (weights then biases), if any.
    pub fn proposer_params(&self) -> Option<&[f64]> {
        self.proposer.as_ref().map(|p| p.params.as_slice())
    }

    /// Named parameter blocks of the online networks.
    pub fn named_params(&self) -> Vec<(&'static str, [usize; 2], &[f64])> {
        let mut out = self.net.named_params();
        if let Some(p) = &self.proposer {
            let b0 = p.bias_offset();
            let rows = b0 / p.hidden;
            out.push(("proposer.weight", [rows, p.hidden], &p.params[..b0]));
            out.push(("proposer.bias", [rows, 1], &p.params[b0..]));
        }
        out
    }

    /// Overwrites one named parameter block of the online network (and the
    /// target copy).
    pub fn set_block(&mut self, name: &str, values: &[f64]) -> Result<()> {
        match (&mut self.proposer, name) {
            (Some(p), "proposer.weight" | "proposer.bias") => {
                let b0 = p.bias_offset();
                let dst = if name == "proposer.weight" { &mut p.params[..b0] } else { &mut p.params[b0..] };
                if dst.len() != values.len() {
                    return Err(Error::LengthMismatch {
                        what: "parameter block",
                        expected: dst.len(),
                        found: values.len(),
                    });
                }
                dst.copy_from_slice(values);
                Ok(())
            }
            _ => {
                self.net.set_block(name, values)?;
                self.target.set_block(name, values)
            }
        }
    }

    fn fixed_fractions(&self) -> FractionSet {
        FractionSet::equally_spaced(self.config.n_fractions).expect("n_fractions >= 1")
    }

    fn fractions_from_features(&self, psi: &[f64], action: usize) -> Result<FractionSet> {
        match &self.proposer {
            Some(p) => fractions_from_logits(&p.logits(psi, action)),
            None => Ok(self.fixed_fractions()),
        }
    }

    /// Fractions the agent uses to value `action` in `state`. Sampled-fraction
    /// agents value actions on the fixed equally spaced grid.
    pub fn fractions(&self, state: &[f64], action: usize) -> Result<FractionSet> {
        let psi = self.net.encode(state)?;
        self.fractions_from_features(&psi, action)
    }

    /// Fractions and midpoint quantile values of `action` in `state`.
    pub fn quantiles(&self, state: &[f64], action: usize) -> Result<(FractionSet, Vec<f64>)> {
        let fractions = self.fractions(state, action)?;
        let values = self.net.quantiles(state, &fractions.midpoints(), action)?;
        Ok((fractions, values))
    }

    fn q_values_with(&self, net: &QuantileValueNet, state: &[f64], psi_online: &[f64]) -> Result<Vec<f64>> {
        let n_actions = net.shape().n_actions;
        if self.proposer.is_none() {
            let fractions = self.fixed_fractions();
            let cache = net.forward(state, &fractions.midpoints())?;
            return (0..n_actions)
                .map(|a| action_value(&fractions, &cache.outputs.iter().map(|o| o[a]).collect::<Vec<_>>()))
                .collect();
        }
        let psi = net.encode(state)?;
        (0..n_actions)
            .map(|a| {
                let fractions = self.fractions_from_features(psi_online, a)?;
                let cache = net.forward_from_features(state, psi.clone(), &fractions.midpoints())?;
                action_value(&fractions, &cache.outputs.iter().map(|o| o[a]).collect::<Vec<_>>())
            })
            .collect()
    }

    /// `Q(x, a)` for every action under the online network.
    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        let psi = self.net.encode(state)?;
        self.q_values_with(&self.net, state, &psi)
    }

    pub fn act<R: Rng + ?Sized>(&self, state: &[f64], epsilon: f64, rng: &mut R) -> Result<usize> {
        epsilon_greedy(&self.q_values(state)?, epsilon, rng)
    }

    fn sample_taus(&mut self) -> Vec<f64> {
        let mut taus: Vec<f64> = (0..self.config.n_fractions).map(|_| self.rng.random::<f64>()).collect();
        taus.sort_by(f64::total_cmp);
        taus
    }

    /// One gradient step on a batch, dispatching on the agent kind.
    pub fn update(&mut self, batch: &[&Transition]) -> Result<UpdateDiagnostics> {
        match self.config.kind {
            AgentKind::Fqf => self.fqf_update(batch),
            _ => self.baseline_update(batch),
        }
    }

    /// Learned-fraction update: value network by quantile regression on the
    /// proposed fractions, proposer by the W1 fraction gradient evaluated on
    /// the online value network.
    pub fn fqf_update(&mut self, batch: &[&Transition]) -> Result<UpdateDiagnostics> {
        if self.config.kind != AgentKind::Fqf {
            return Err(Error::InvalidConfig(format!("fqf_update on a {} agent", self.config.kind.name())));
        }
        self.step(batch)
    }

    /// Fixed- or sampled-fraction update. No proposer is involved.
    pub fn baseline_update(&mut self, batch: &[&Transition]) -> Result<UpdateDiagnostics> {
        if self.config.kind == AgentKind::Fqf {
            return Err(Error::InvalidConfig("baseline_update on an fqf agent".into()));
        }
        self.step(batch)
    }

    fn step(&mut self, batch: &[&Transition]) -> Result<UpdateDiagnostics> {
        if batch.is_empty() {
            return Err(Error::InvalidParameter("empty update batch".into()));
        }
        let n_actions = self.net.shape().n_actions;
        let scale = 1.0 / batch.len() as f64;
        let mut value_grad = vec![0.0; self.net.params().len()];
        let mut proposer_grad = self.proposer.as_ref().map(|p| vec![0.0; p.params.len()]);
        let (mut loss, mut tau_grad_sum, mut tau_grad_count, mut non_monotone) = (0.0, 0.0, 0usize, 0usize);

        for t in batch {
            if t.action >= n_actions {
                return Err(Error::InvalidParameter(format!("action {} out of range", t.action)));
            }
            let psi = self.net.encode(&t.state)?;

            // fractions for the current quantiles, and those for the target
            let (fractions, current_taus, target_taus) = match self.config.kind {
                AgentKind::SampledFraction => {
                    let cur = self.sample_taus();
                    let tgt = self.sample_taus();
                    (None, cur, tgt)
                }
                _ => {
                    let f = self.fractions_from_features(&psi, t.action)?;
                    let mids = f.midpoints();
                    (Some(f), mids.clone(), mids)
                }
            };

            let target_values = if t.terminal {
                vec![t.reward; target_taus.len()]
            } else {
                let psi_next = self.net.encode(&t.next_state)?;
                let q_next = self.q_values_with(&self.target, &t.next_state, &psi_next)?;
                let best = argmax(&q_next);
                let next = self.target.quantiles(&t.next_state, &target_taus, best)?;
                bellman_target(t.reward, self.config.gamma, false, &next)
            };

            let cache = self.net.forward_from_features(&t.state, psi.clone(), &current_taus)?;
            let current: Vec<f64> = cache.outputs.iter().map(|o| o[t.action]).collect();
            if current.windows(2).any(|w| w[1] < w[0]) {
                non_monotone += 1;
            }
            let delta = td_error_matrix(0.0, 1.0, &target_values, &current)?;
            loss += quantile_loss(&delta, &current_taus, self.huber)?;
            let dq = quantile_loss_gradient(&delta, &current_taus, self.huber)?;
            let upstream: Vec<Vec<f64>> = dq
                .iter()
                .map(|&g| {
                    let mut row = vec![0.0; n_actions];
                    row[t.action] = scale * g;
                    row
                })
                .collect();
            self.net.accumulate_gradient(&cache, &upstream, &mut value_grad)?;

            if let (Some(p), Some(grad), Some(f)) = (&self.proposer, proposer_grad.as_mut(), &fractions) {
                let interior = f.interior();
                let at_interior = self.net.forward_from_features(&t.state, psi.clone(), interior)?;
                let at_interior: Vec<f64> = at_interior.outputs.iter().map(|o| o[t.action]).collect();
                let tau_grad = fraction_gradient_from_values(interior, &current, |tau| {
                    let k = interior.partition_point(|&x| x < tau);
                    at_interior[k]
                });
                tau_grad_sum += tau_grad.iter().map(|g| g.abs()).sum::<f64>();
                tau_grad_count += tau_grad.len();
                let logits = p.logits(&psi, t.action);
                let lg = logit_gradient(&logits, &tau_grad, self.config.entropy_coeff)?;
                p.accumulate(&psi, t.action, &lg, scale, grad);
            }
        }

        let loss = loss * scale;
        let mean_tau_grad = if tau_grad_count > 0 { tau_grad_sum / tau_grad_count as f64 } else { 0.0 };
        if !loss.is_finite() || !mean_tau_grad.is_finite() {
            return Err(Error::NonFiniteLoss { update: self.updates, loss, mean_tau_grad });
        }

        self.value_opt.step(self.net.params_mut(), &value_grad);
        if let (Some(p), Some(grad), Some(opt)) = (self.proposer.as_mut(), proposer_grad, self.fraction_opt.as_mut()) {
            opt.step(&mut p.params, &grad);
        }
        self.updates += 1;
        if self.updates.is_multiple_of(self.config.target_sync) {
            self.target = self.net.clone();
        }
        Ok(UpdateDiagnostics { loss, mean_tau_grad, non_monotone: non_monotone as f64 * scale })
    }
}

/// Acts epsilon-greedily with respect to an agent's `Q` values.
pub struct AgentPolicy<'a> {
    pub agent: &'a Agent,
    pub epsilon: f64,
}

impl Policy for AgentPolicy<'_> {
    fn action(&mut self, mdp: &ToyMdp, state: usize, rng: &mut dyn RngCore) -> Result<usize> {
        self.agent.act(mdp.features(state), self.epsilon, rng)
    }
}
