use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::quantile::QuantileFunction;
use crate::{Error, Result};

/// Episodes are truncated after this many steps.
pub const HORIZON_CAP: usize = 200;

/// Finite-support distribution as `(value, probability)` pairs.
pub type Categorical = Vec<(f64, f64)>;

/// A finite MDP with one-hot or custom state features, a stochastic
/// transition table and finite-support rewards.
///
/// Entering a terminal state ends the episode. Terminal states need no
/// transition or reward rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ToyMdp {
    pub name: String,
    features: Vec<Vec<f64>>,
    n_actions: usize,
    /// `transitions[s][a][s']`.
    transitions: Vec<Vec<Vec<f64>>>,
    rewards: Vec<Vec<Categorical>>,
    terminal: Vec<bool>,
    gamma: f64,
    start: usize,
    horizon: usize,
}

/// Raw description of a [`ToyMdp`], validated by [`ToyMdp::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct MdpDescription {
    pub name: String,
    /// Per-state feature vectors; `None` means one-hot encoding.
    pub features: Option<Vec<Vec<f64>>>,
    pub n_states: usize,
    pub n_actions: usize,
    pub transitions: Vec<Vec<Vec<f64>>>,
    pub rewards: Vec<Vec<Categorical>>,
    pub terminal: Vec<bool>,
    pub gamma: f64,
    pub start: usize,
}

fn check_categorical(what: &str, dist: &[(f64, f64)]) -> Result<()> {
    if dist.is_empty() {
        return Err(Error::InvalidMdp(format!("{what}: empty distribution")));
    }
    let mut total = 0.0;
    for &(v, p) in dist {
        if !v.is_finite() {
            return Err(Error::InvalidMdp(format!("{what}: non-finite value {v}")));
        }
        if !(p >= 0.0) {
            return Err(Error::InvalidMdp(format!("{what}: negative probability {p}")));
        }
        total += p;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidMdp(format!("{what}: probabilities sum to {total}")));
    }
    Ok(())
}

fn sample_index<R: Rng + ?Sized>(probs: impl Iterator<Item = f64>, rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, p) in probs.enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return i;
            }
        }
    }
    last
}

impl ToyMdp {
    pub fn new(desc: MdpDescription) -> Result<Self> {
        let MdpDescription { name, features, n_states, n_actions, transitions, rewards, terminal, gamma, start } = desc;
        if n_states == 0 || n_actions == 0 {
            return Err(Error::InvalidMdp("need at least one state and one action".into()));
        }
        if !(gamma > 0.0 && gamma < 1.0) {
            return Err(Error::InvalidMdp(format!("discount must lie in (0, 1), got {gamma}")));
        }
        if terminal.len() != n_states {
            return Err(Error::InvalidMdp(format!("{} terminal flags for {n_states} states", terminal.len())));
        }
        if start >= n_states || terminal[start] {
            return Err(Error::InvalidMdp(format!("start state {start} is out of range or terminal")));
        }
        if transitions.len() != n_states || rewards.len() != n_states {
            return Err(Error::InvalidMdp("transition and reward tables need one entry per state".into()));
        }
        for s in (0..n_states).filter(|&s| !terminal[s]) {
            if transitions[s].len() != n_actions || rewards[s].len() != n_actions {
                return Err(Error::InvalidMdp(format!("state {s}: need one row per action")));
            }
            for a in 0..n_actions {
                let row = &transitions[s][a];
                if row.len() != n_states {
                    return Err(Error::InvalidMdp(format!(
                        "state {s}, action {a}: transition row has {} entries",
                        row.len()
                    )));
                }
                if row.iter().any(|&p| !(p >= 0.0)) {
                    return Err(Error::InvalidMdp(format!("state {s}, action {a}: negative transition probability")));
                }
                let total: f64 = row.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(Error::InvalidMdp(format!("state {s}, action {a}: transition row sums to {total}")));
                }
                check_categorical(&format!("state {s}, action {a} reward"), &rewards[s][a])?;
            }
        }
        let features = match features {
            None => (0..n_states)
                .map(|s| {
                    let mut f = vec![0.0; n_states];
                    f[s] = 1.0;
                    f
                })
                .collect(),
            Some(f) => {
                if f.len() != n_states {
                    return Err(Error::InvalidMdp(format!("{} feature vectors for {n_states} states", f.len())));
                }
                let dim = f[0].len();
                if dim == 0 || f.iter().any(|v| v.len() != dim || v.iter().any(|x| !x.is_finite())) {
                    return Err(Error::InvalidMdp("feature vectors must share a positive length and be finite".into()));
                }
                f
            }
        };
        Ok(Self { name, features, n_actions, transitions, rewards, terminal, gamma, start, horizon: HORIZON_CAP })
    }

    pub fn n_states(&self) -> usize {
        self.features.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn state_dim(&self) -> usize {
        self.features[0].len()
    }

    pub fn features(&self, state: usize) -> &[f64] {
        &self.features[state]
    }

    pub fn is_terminal(&self, state: usize) -> bool {
        self.terminal[state]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn reward_distribution(&self, state: usize, action: usize) -> &[(f64, f64)] {
        &self.rewards[state][action]
    }

    pub fn transition_row(&self, state: usize, action: usize) -> &[f64] {
        &self.transitions[state][action]
    }

    /// Samples `(reward, next_state)`.
    pub fn step<R: Rng + ?Sized>(&self, state: usize, action: usize, rng: &mut R) -> (f64, usize) {
        let dist = &self.rewards[state][action];
        let reward = dist[sample_index(dist.iter().map(|&(_, p)| p), rng)].0;
        let next = sample_index(self.transitions[state][action].iter().copied(), rng);
        (reward, next)
    }
}

/// Chooses actions in a [`ToyMdp`].
pub trait Policy {
    fn action(&mut self, mdp: &ToyMdp, state: usize, rng: &mut dyn rand::RngCore) -> Result<usize>;
}

impl<F> Policy for F
where
    F: FnMut(&ToyMdp, usize, &mut dyn rand::RngCore) -> Result<usize>,
{
    fn action(&mut self, mdp: &ToyMdp, state: usize, rng: &mut dyn rand::RngCore) -> Result<usize> {
        self(mdp, state, rng)
    }
}

/// Uniformly random actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn action(&mut self, mdp: &ToyMdp, _state: usize, rng: &mut dyn rand::RngCore) -> Result<usize> {
        Ok(rng.random_range(0..mdp.n_actions()))
    }
}

/// Discounted return of one rollout that starts with `action` in `state` and
/// follows `policy` afterwards, truncated at the horizon cap.
pub fn rollout_return<P: Policy + ?Sized, R: rand::RngCore>(
    mdp: &ToyMdp,
    policy: &mut P,
    state: usize,
    action: usize,
    rng: &mut R,
) -> Result<f64> {
    let (mut s, mut a) = (state, action);
    let mut ret = 0.0;
    let mut discount = 1.0;
    for _ in 0..mdp.horizon() {
        let (r, next) = mdp.step(s, a, rng);
        ret += discount * r;
        discount *= mdp.gamma();
        if mdp.is_terminal(next) {
            break;
        }
        s = next;
        a = policy.action(mdp, s, rng)?;
    }
    Ok(ret)
}

/// `n_draws` Monte-Carlo samples of the discounted return `Z(x, a)`.
pub fn sample_returns<P: Policy + ?Sized, R: rand::RngCore>(
    mdp: &ToyMdp,
    policy: &mut P,
    state: usize,
    action: usize,
    n_draws: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if state >= mdp.n_states() || mdp.is_terminal(state) || action >= mdp.n_actions() {
        return Err(Error::InvalidParameter(format!("no return distribution for state {state}, action {action}")));
    }
    (0..n_draws).map(|_| rollout_return(mdp, policy, state, action, rng)).collect()
}

/// Empirical quantile function of `n_draws` Monte-Carlo returns.
pub fn true_return_distribution<P: Policy + ?Sized, R: rand::RngCore>(
    mdp: &ToyMdp,
    policy: &mut P,
    state: usize,
    action: usize,
    n_draws: usize,
    rng: &mut R,
) -> Result<QuantileFunction> {
    QuantileFunction::empirical(&sample_returns(mdp, policy, state, action, n_draws, rng)?)
}

/// Mean and standard error of undiscounted episode returns from the start
/// state.
pub fn evaluate_policy<P: Policy + ?Sized, R: rand::RngCore>(
    mdp: &ToyMdp,
    policy: &mut P,
    episodes: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if episodes == 0 {
        return Err(Error::InvalidParameter("need at least one evaluation episode".into()));
    }
    let mut returns = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut s = mdp.start();
        let mut ret = 0.0;
        for _ in 0..mdp.horizon() {
            let a = policy.action(mdp, s, rng)?;
            let (r, next) = mdp.step(s, a, rng);
            ret += r;
            if mdp.is_terminal(next) {
                break;
            }
            s = next;
        }
        returns.push(ret);
    }
    let n = episodes as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let stderr = if episodes > 1 {
        let var = returns.iter().map(|r| (r - mean) * (r - mean)).sum::<f64>() / (n - 1.0);
        libm::sqrt(var / n)
    } else {
        0.0
    };
    Ok((mean, stderr))
}
