//! Training runs with periodic learning-curve rows and a final checkpoint.

use std::ops::ControlFlow;
use std::path::Path;

use fqf_core::quantile::w1_error;
use fqf_core::rl::{
    epsilon_greedy, evaluate_policy, train, true_return_distribution, Agent, AgentConfig, Policy, ToyMdp,
};
use fqf_core::StaircaseApproximation;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::RunContext;
use crate::checkpoint::Checkpoint;
use crate::config::{ExperimentConfig, TrainSection};
use crate::env_config;
use crate::error::{HarnessError, Result};
use crate::output::{write_csv, ResultRow};

/// Epsilon-greedy over `Q` values computed once per state. Equivalent to
/// acting with the agent directly, but rollouts no longer pay a forward
/// pass per step.
pub struct CachedPolicy {
    q: Vec<Vec<f64>>,
    epsilon: f64,
}

impl CachedPolicy {
    pub fn new(agent: &Agent, mdp: &ToyMdp, epsilon: f64) -> Result<Self> {
        let q = (0..mdp.n_states())
            .map(|s| if mdp.is_terminal(s) { Ok(Vec::new()) } else { agent.q_values(mdp.features(s)) })
            .collect::<fqf_core::Result<_>>()?;
        Ok(Self { q, epsilon })
    }
}

impl Policy for CachedPolicy {
    fn action(&mut self, _mdp: &ToyMdp, state: usize, rng: &mut dyn RngCore) -> fqf_core::Result<usize> {
        epsilon_greedy(&self.q[state], self.epsilon, rng)
    }
}

/// Rows for one log point: training diagnostics, `Q` and W1 against
/// Monte-Carlo returns for every action at the start state, and the
/// evaluation return.
fn probe_rows(
    ctx: &RunContext,
    id: &str,
    seed: u64,
    mdp: &ToyMdp,
    agent: &Agent,
    section: &TrainSection,
    update: u64,
) -> Result<Vec<ResultRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2 + update);
    let epsilon = agent.config().epsilon_eval;
    let mut policy = CachedPolicy::new(agent, mdp, epsilon)?;
    let start = mdp.start();
    let x = mdp.features(start);
    let mut rows = Vec::new();
    for (a, q) in agent.q_values(x)?.into_iter().enumerate() {
        rows.push(ctx.row(id, seed, update, format!("q_a{a}"), q));
    }
    for a in 0..mdp.n_actions() {
        let truth = true_return_distribution(mdp, &mut policy, start, a, section.mc_draws, &mut rng)?;
        let (fractions, values) = agent.quantiles(x, a)?;
        let w1 = w1_error(&truth, &StaircaseApproximation::new(fractions, values)?)?;
        rows.push(ctx.row(id, seed, update, format!("w1_a{a}"), w1));
    }
    let (mean, stderr) = evaluate_policy(mdp, &mut policy, section.eval_episodes, &mut rng)?;
    rows.push(ctx.row(id, seed, update, "eval_return_mean", mean));
    rows.push(ctx.row(id, seed, update, "eval_return_stderr", stderr));
    Ok(rows)
}

/// Rows of one training run. On failure the rows so far, including a
/// diagnostics row for a non-finite loss, come back with the error.
pub struct RunOutcome {
    pub rows: Vec<ResultRow>,
    pub agent: Agent,
    pub error: Option<HarnessError>,
}

pub fn train_one(
    ctx: &RunContext,
    id: &str,
    mdp: &ToyMdp,
    config: AgentConfig,
    section: &TrainSection,
    seed: u64,
) -> Result<RunOutcome> {
    let mut agent = Agent::for_mdp(config, mdp, seed)?;
    let mut rows = Vec::new();
    let mut probe_error = None;
    let result = train(mdp, &mut agent, &section.train_config(), seed, |agent, point| {
        let d = point.diagnostics;
        let step = point.update;
        rows.push(ctx.row(id, seed, step, "loss", d.loss));
        rows.push(ctx.row(id, seed, step, "tau_grad", d.mean_tau_grad));
        rows.push(ctx.row(id, seed, step, "non_monotone", d.non_monotone));
        match probe_rows(ctx, id, seed, mdp, agent, section, step) {
            Ok(probe) => {
                rows.extend(probe);
                ControlFlow::Continue(())
            }
            Err(e) => {
                probe_error = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    let error = match result {
        Ok(_) => probe_error,
        Err(e) => {
            if let fqf_core::Error::NonFiniteLoss { update, loss, mean_tau_grad } = e {
                rows.push(ctx.row(id, seed, update, "loss", loss));
                rows.push(ctx.row(id, seed, update, "tau_grad", mean_tau_grad));
            }
            Some(e.into())
        }
    };
    Ok(RunOutcome { rows, agent, error })
}

pub fn resolve_env(config: &ExperimentConfig) -> Result<ToyMdp> {
    let t = &config.train;
    let file = t.env_file.as_ref().map(|p| config.base_dir.join(p));
    env_config::resolve(&t.env, file.as_deref())
}

pub fn checkpoint_path(dir: &Path, stem: &str) -> std::path::PathBuf {
    dir.join(format!("{stem}.json"))
}

pub fn run(config: &ExperimentConfig, ctx: &RunContext) -> Result<()> {
    let mdp = resolve_env(config)?;
    let agent_config = config.train.agent.apply(AgentConfig::default())?;
    let outcomes: Vec<RunOutcome> = config
        .seeds
        .par_iter()
        .map(|&seed| train_one(ctx, &ctx.id, &mdp, agent_config.clone(), &config.train, seed))
        .collect::<Result<_>>()?;

    let rows: Vec<ResultRow> = outcomes.iter().flat_map(|o| o.rows.iter().cloned()).collect();
    write_csv(&ctx.out.join("train.csv"), &rows)?;
    let mut first_error = None;
    for (outcome, &seed) in outcomes.into_iter().zip(&config.seeds) {
        match outcome.error {
            None => {
                let path = checkpoint_path(&ctx.out, &format!("checkpoint-seed{seed}"));
                Checkpoint::capture(&outcome.agent, &mdp.name, seed).save(&path)?;
                log::info!("seed {seed}: {} updates, checkpoint {}", outcome.agent.updates(), path.display());
            }
            Some(e) => {
                log::error!("seed {seed}: {e}");
                first_error.get_or_insert(e);
            }
        }
    }
    first_error.map_or(Ok(()), Err)
}
