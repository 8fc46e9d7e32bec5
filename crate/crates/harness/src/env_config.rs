//! Declarative environment files.
//!
//! ```toml
//! schema_version = 1
//! name = "coin-flip"
//! gamma = 0.9
//! start = 0
//! n_actions = 1
//!
//! [[states]]
//! [[states.actions]]
//! next = [[1, 1.0]]                  # (state, probability)
//! reward = [[0.0, 0.5], [2.0, 0.5]]  # (value, probability)
//!
//! [[states]]
//! terminal = true
//! ```

use std::path::Path;

use fqf_core::rl::envs::{builtin, BUILTIN_NAMES};
use fqf_core::rl::{MdpDescription, ToyMdp};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvFile {
    pub schema_version: u32,
    pub name: String,
    pub gamma: f64,
    #[serde(default)]
    pub start: usize,
    pub n_actions: usize,
    pub states: Vec<StateSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default)]
    pub terminal: bool,
    /// Feature vector; either every state has one or none does (one-hot).
    #[serde(default)]
    pub features: Option<Vec<f64>>,
    #[serde(default)]
    pub actions: Vec<ActionSpec>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionSpec {
    pub next: Vec<(usize, f64)>,
    pub reward: Vec<(f64, f64)>,
}

impl EnvFile {
    pub fn parse(text: &str) -> Result<Self> {
        let file: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if file.schema_version != crate::config::SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported environment schema_version {}",
                file.schema_version
            )));
        }
        Ok(file)
    }

    pub fn description(&self) -> Result<MdpDescription> {
        let n_states = self.states.len();
        let bad = |msg: String| HarnessError::Config(format!("environment {:?}: {msg}", self.name));
        let with_features = self.states.iter().filter(|s| s.features.is_some()).count();
        if with_features != 0 && with_features != n_states {
            return Err(bad("either every state or no state must list features".into()));
        }
        let mut transitions = Vec::with_capacity(n_states);
        let mut rewards = Vec::with_capacity(n_states);
        for (s, state) in self.states.iter().enumerate() {
            if state.terminal {
                if !state.actions.is_empty() {
                    return Err(bad(format!("terminal state {s} lists actions")));
                }
                transitions.push(Vec::new());
                rewards.push(Vec::new());
                continue;
            }
            if state.actions.len() != self.n_actions {
                return Err(bad(format!(
                    "state {s} lists {} actions, expected {}",
                    state.actions.len(),
                    self.n_actions
                )));
            }
            let mut rows = Vec::with_capacity(self.n_actions);
            for (a, action) in state.actions.iter().enumerate() {
                let mut row = vec![0.0; n_states];
                for &(next, p) in &action.next {
                    *row.get_mut(next)
                        .ok_or_else(|| bad(format!("state {s} action {a}: next state {next} out of range")))? += p;
                }
                rows.push(row);
            }
            transitions.push(rows);
            rewards.push(state.actions.iter().map(|a| a.reward.clone()).collect());
        }
        Ok(MdpDescription {
            name: self.name.clone(),
            features: (with_features > 0)
                .then(|| self.states.iter().map(|s| s.features.clone().unwrap_or_default()).collect()),
            n_states,
            n_actions: self.n_actions,
            transitions,
            rewards,
            terminal: self.states.iter().map(|s| s.terminal).collect(),
            gamma: self.gamma,
            start: self.start,
        })
    }

    pub fn build(&self) -> Result<ToyMdp> {
        Ok(ToyMdp::new(self.description()?)?)
    }
}

/// Loads an environment file, or a built-in environment by name.
pub fn resolve(env: &str, env_file: Option<&Path>) -> Result<ToyMdp> {
    match env_file {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
            EnvFile::parse(&text).and_then(|f| f.build()).map_err(|e| match e {
                HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
                other => other,
            })
        }
        None => builtin(env).ok_or_else(|| {
            HarnessError::Config(format!(
                "unknown environment {env:?}; built-in environments: {}",
                BUILTIN_NAMES.join(", ")
            ))
        }),
    }
}
