//! Toy MDPs with checkable return distributions, experience replay and the
//! learned-, fixed- and sampled-fraction agents.

mod agent;
pub mod envs;
mod mdp;
mod replay;
mod train;

pub use agent::{bellman_target, epsilon_greedy, Agent, AgentConfig, AgentKind, AgentPolicy, UpdateDiagnostics};
pub use mdp::{
    evaluate_policy, rollout_return, sample_returns, true_return_distribution, Categorical, MdpDescription, Policy,
    RandomPolicy, ToyMdp, HORIZON_CAP,
};
pub use replay::{ReplayBuffer, Transition};
pub use train::{train, LogPoint, TrainConfig, TrainSummary};
