//! JSON checkpoints: agent settings plus every named parameter block with
//! its shape. Optimizer moments and the replay buffer are not saved.

use std::path::Path;

use fqf_core::rl::{Agent, AgentConfig};
use serde::{Deserialize, Serialize};

use crate::config::parse_kind;
use crate::error::{HarnessError, Result};

pub const FORMAT: &str = "fqf-checkpoint";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub version: u32,
    pub env: String,
    pub seed: u64,
    pub updates: u64,
    pub state_dim: usize,
    pub n_actions: usize,
    pub agent: AgentSettings,
    pub params: Vec<ParamBlock>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSettings {
    pub kind: String,
    pub n_fractions: usize,
    pub kappa: f64,
    pub gamma: f64,
    pub epsilon_train: f64,
    pub epsilon_eval: f64,
    pub value_lr: f64,
    pub fraction_lr: f64,
    pub target_sync: u64,
    pub entropy_coeff: f64,
    pub hidden: usize,
    pub n_basis: usize,
}

/// Row-major block of `shape[0] * shape[1]` values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBlock {
    pub name: String,
    pub shape: [usize; 2],
    pub data: Vec<f64>,
}

impl From<&AgentConfig> for AgentSettings {
    fn from(c: &AgentConfig) -> Self {
        Self {
            kind: c.kind.name().to_owned(),
            n_fractions: c.n_fractions,
            kappa: c.kappa,
            gamma: c.gamma,
            epsilon_train: c.epsilon_train,
            epsilon_eval: c.epsilon_eval,
            value_lr: c.value_lr,
            fraction_lr: c.fraction_lr,
            target_sync: c.target_sync,
            entropy_coeff: c.entropy_coeff,
            hidden: c.hidden,
            n_basis: c.n_basis,
        }
    }
}

impl AgentSettings {
    pub fn to_config(&self) -> Result<AgentConfig> {
        Ok(AgentConfig {
            kind: parse_kind(&self.kind)?,
            n_fractions: self.n_fractions,
            kappa: self.kappa,
            gamma: self.gamma,
            epsilon_train: self.epsilon_train,
            epsilon_eval: self.epsilon_eval,
            value_lr: self.value_lr,
            fraction_lr: self.fraction_lr,
            target_sync: self.target_sync,
            entropy_coeff: self.entropy_coeff,
            hidden: self.hidden,
            n_basis: self.n_basis,
        })
    }
}

impl Checkpoint {
    pub fn capture(agent: &Agent, env: &str, seed: u64) -> Self {
        let shape = agent.net().shape();
        Self {
            format: FORMAT.to_owned(),
            version: VERSION,
            env: env.to_owned(),
            seed,
            updates: agent.updates(),
            state_dim: shape.state_dim,
            n_actions: shape.n_actions,
            agent: agent.config().into(),
            params: agent
                .named_params()
                .into_iter()
                .map(|(name, shape, data)| ParamBlock { name: name.to_owned(), shape, data: data.to_vec() })
                .collect(),
        }
    }

    /// Rebuilds an agent with the saved parameters in both the online and
    /// target networks.
    pub fn restore(&self) -> Result<Agent> {
        if self.format != FORMAT || self.version != VERSION {
            return Err(HarnessError::Config(format!("unsupported checkpoint {} v{}", self.format, self.version)));
        }
        let mut agent = Agent::new(self.agent.to_config()?, self.state_dim, self.n_actions, self.seed)?;
        let expected: Vec<_> = agent.named_params().into_iter().map(|(name, shape, _)| (name, shape)).collect();
        if expected.len() != self.params.len() {
            return Err(HarnessError::Config(format!(
                "checkpoint has {} blocks, expected {}",
                self.params.len(),
                expected.len()
            )));
        }
        for block in &self.params {
            let Some(&(_, shape)) = expected.iter().find(|(name, _)| *name == block.name) else {
                return Err(HarnessError::Config(format!("unexpected parameter block {:?}", block.name)));
            };
            if shape != block.shape || block.data.len() != shape[0] * shape[1] {
                return Err(HarnessError::Config(format!(
                    "block {:?} has shape {:?}, expected {shape:?}",
                    block.name, block.shape
                )));
            }
            agent.set_block(&block.name, &block.data)?;
        }
        Ok(agent)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("checkpoint serializes");
        std::fs::write(path, text + "\n").map_err(|e| HarnessError::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }
}
