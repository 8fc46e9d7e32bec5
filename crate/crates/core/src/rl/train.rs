use core::ops::ControlFlow;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::agent::{Agent, UpdateDiagnostics};
use super::mdp::ToyMdp;
use super::replay::{ReplayBuffer, Transition};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    /// Number of gradient updates.
    pub updates: u64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Transitions collected before the first update.
    pub warmup: usize,
    /// Environment steps between updates.
    pub steps_per_update: usize,
    /// Updates between log callbacks.
    pub log_every: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            updates: 20_000,
            batch_size: 32,
            replay_capacity: 10_000,
            warmup: 32,
            steps_per_update: 1,
            log_every: 500,
        }
    }
}

/// Passed to the training callback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogPoint {
    pub update: u64,
    pub env_steps: u64,
    pub episodes: u64,
    pub diagnostics: UpdateDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainSummary {
    pub updates: u64,
    pub env_steps: u64,
    pub episodes: u64,
    pub last: Option<UpdateDiagnostics>,
}

/// Interleaves epsilon-greedy interaction with replayed updates.
///
/// `on_log` runs every `log_every` updates and after the final update; it
/// may stop training early by returning `ControlFlow::Break`. Everything is
/// driven by `seed`, so identical seeds give identical runs.
pub fn train<F>(mdp: &ToyMdp, agent: &mut Agent, config: &TrainConfig, seed: u64, mut on_log: F) -> Result<TrainSummary>
where
    F: FnMut(&Agent, &LogPoint) -> ControlFlow<()>,
{
    if config.batch_size == 0 || config.steps_per_update == 0 || config.log_every == 0 {
        return Err(Error::InvalidConfig("batch_size, steps_per_update and log_every must be positive".into()));
    }
    let mut env_rng = ChaCha8Rng::seed_from_u64(seed);
    env_rng.set_stream(1);
    let mut replay = ReplayBuffer::new(config.replay_capacity, seed ^ 0x9e37_79b9_7f4a_7c15)?;
    let warmup = config.warmup.max(1);
    let epsilon = agent.config().epsilon_train;

    let mut summary = TrainSummary { updates: 0, env_steps: 0, episodes: 0, last: None };
    let mut state = mdp.start();
    let mut episode_len = 0;
    while summary.updates < config.updates {
        for _ in 0..config.steps_per_update {
            let x = mdp.features(state);
            let a = agent.act(x, epsilon, &mut env_rng)?;
            let (r, next) = mdp.step(state, a, &mut env_rng);
            let terminal = mdp.is_terminal(next);
            replay.push(Transition {
                state: x.to_vec(),
                action: a,
                reward: r,
                next_state: mdp.features(next).to_vec(),
                terminal,
            })?;
            summary.env_steps += 1;
            episode_len += 1;
            if terminal || episode_len >= mdp.horizon() {
                state = mdp.start();
                episode_len = 0;
                summary.episodes += 1;
            } else {
                state = next;
            }
        }
        if replay.len() < warmup {
            continue;
        }
        let diagnostics = agent.update(&replay.sample(config.batch_size)?)?;
        summary.updates += 1;
        summary.last = Some(diagnostics);
        if summary.updates.is_multiple_of(config.log_every) || summary.updates == config.updates {
            let point = LogPoint {
                update: summary.updates,
                env_steps: summary.env_steps,
                episodes: summary.episodes,
                diagnostics,
            };
            if on_log(agent, &point).is_break() {
                break;
            }
        }
    }
    Ok(summary)
}
