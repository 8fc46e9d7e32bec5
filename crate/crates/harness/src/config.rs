//! Experiment configuration files (TOML).

use std::path::{Path, PathBuf};

use fqf_core::fraction::{OptimizerState, StepSchedule};
use fqf_core::rl::TrainConfig;
use fqf_core::{AgentConfig, AgentKind};
use serde::Deserialize;

use crate::error::{HarnessError, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    Approx,
    Gradcheck,
    Optimize,
    Train,
    Sweep,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Approx => "approx",
            Self::Gradcheck => "gradcheck",
            Self::Optimize => "optimize",
            Self::Train => "train",
            Self::Sweep => "sweep",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    /// If present, must match the subcommand.
    #[serde(default)]
    pub kind: Option<ExperimentKind>,
    /// Written to the `experiment_id` column; defaults to the subcommand name.
    #[serde(default)]
    pub id: Option<String>,
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    /// Fill the `wall_ms` column. Off by default because it breaks
    /// byte-identical reruns.
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub optimizer: OptimizerSection,
    #[serde(default)]
    pub approx: ApproxSection,
    #[serde(default)]
    pub optimize: OptimizeSection,
    #[serde(default)]
    pub gradcheck: GradcheckSection,
    #[serde(default)]
    pub train: TrainSection,
    #[serde(default)]
    pub sweep: SweepSection,
    /// Directory of the config file; relative `env_file` paths resolve here.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_out() -> PathBuf {
    PathBuf::from("results")
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            kind: None,
            id: None,
            seeds: default_seeds(),
            out: default_out(),
            timing: false,
            optimizer: OptimizerSection::default(),
            approx: ApproxSection::default(),
            optimize: OptimizeSection::default(),
            gradcheck: GradcheckSection::default(),
            train: TrainSection::default(),
            sweep: SweepSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    Constant,
    /// Linear decay to zero over the step budget.
    LinearDecay,
}

/// RMSProp settings for fraction optimization.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerSection {
    pub step_size: f64,
    pub decay: f64,
    pub epsilon: f64,
    pub schedule: Schedule,
}

impl Default for OptimizerSection {
    fn default() -> Self {
        let base = OptimizerState::rmsprop(0.05).expect("valid step size");
        Self { step_size: base.step_size, decay: base.decay, epsilon: base.epsilon, schedule: Schedule::LinearDecay }
    }
}

impl OptimizerSection {
    pub fn build(&self, steps: usize) -> Result<OptimizerState> {
        if !(self.decay >= 0.0 && self.decay < 1.0) {
            return Err(HarnessError::Config(format!("optimizer.decay must lie in [0, 1), got {}", self.decay)));
        }
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(HarnessError::Config(format!("optimizer.epsilon must be positive, got {}", self.epsilon)));
        }
        let schedule = match self.schedule {
            Schedule::Constant => StepSchedule::Constant,
            Schedule::LinearDecay => StepSchedule::LinearDecay { horizon: steps as u64 },
        };
        let mut state = OptimizerState::rmsprop(self.step_size)?.with_schedule(schedule);
        state.decay = self.decay;
        state.epsilon = self.epsilon;
        Ok(state)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ApproxSection {
    pub distributions: Vec<String>,
    pub n: Vec<usize>,
    pub steps: usize,
    pub entropy_coeff: f64,
    /// Random fraction sets averaged for the `w1_random_mean` row.
    pub random_draws: usize,
}

impl Default for ApproxSection {
    fn default() -> Self {
        Self {
            distributions: crate::distributions::SUITE.iter().map(|s| s.to_string()).collect(),
            n: vec![4, 8, 32],
            steps: 2000,
            entropy_coeff: 0.0,
            random_draws: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizeSection {
    pub distribution: String,
    pub n: usize,
    pub steps: usize,
    pub entropy_coeff: f64,
    /// Starting logits; equal logits (uniform fractions) if absent.
    pub init_logits: Option<Vec<f64>>,
}

impl Default for OptimizeSection {
    fn default() -> Self {
        Self { distribution: "exponential".into(), n: 8, steps: 2000, entropy_coeff: 0.0, init_logits: None }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GradcheckSection {
    /// Random (distribution, fractions) pairs for the fraction gradient.
    pub pairs: usize,
    pub nets: usize,
    pub params_per_net: usize,
    pub tolerance: f64,
    /// Negates the analytic gradients. Negative control for the audit itself.
    pub flip_sign: bool,
    /// Audit an all-zero network against all-zero targets.
    pub zero_params: bool,
}

impl Default for GradcheckSection {
    fn default() -> Self {
        Self { pairs: 100, nets: 10, params_per_net: 200, tolerance: 1e-4, flip_sign: false, zero_params: false }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainSection {
    /// Built-in environment name. Ignored when `env_file` is set.
    pub env: String,
    pub env_file: Option<PathBuf>,
    pub updates: u64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub warmup: usize,
    pub steps_per_update: usize,
    pub log_every: u64,
    pub eval_episodes: usize,
    /// Monte-Carlo returns per action for the ground-truth W1 rows.
    pub mc_draws: usize,
    pub agent: AgentSection,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        Self {
            env: "single-state".into(),
            env_file: None,
            updates: t.updates,
            batch_size: t.batch_size,
            replay_capacity: t.replay_capacity,
            warmup: t.warmup,
            steps_per_update: t.steps_per_update,
            log_every: t.log_every,
            eval_episodes: 100,
            mc_draws: 1000,
            agent: AgentSection::default(),
        }
    }
}

impl TrainSection {
    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            updates: self.updates,
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity,
            warmup: self.warmup,
            steps_per_update: self.steps_per_update,
            log_every: self.log_every,
        }
    }
}

/// Overrides for [`AgentConfig`]. The discount comes from the environment.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AgentSection {
    pub kind: Option<String>,
    pub n_fractions: Option<usize>,
    pub kappa: Option<f64>,
    pub epsilon_train: Option<f64>,
    pub epsilon_eval: Option<f64>,
    pub value_lr: Option<f64>,
    pub fraction_lr: Option<f64>,
    pub target_sync: Option<u64>,
    pub entropy_coeff: Option<f64>,
    pub hidden: Option<usize>,
    pub n_basis: Option<usize>,
}

pub fn parse_kind(name: &str) -> Result<AgentKind> {
    AgentKind::from_name(name).ok_or_else(|| {
        let known: Vec<_> = AgentKind::ALL.iter().map(|k| k.name()).collect();
        HarnessError::Config(format!("unknown agent kind {name:?}; known kinds: {}", known.join(", ")))
    })
}

impl AgentSection {
    pub fn apply(&self, mut c: AgentConfig) -> Result<AgentConfig> {
        if let Some(kind) = &self.kind {
            c.kind = parse_kind(kind)?;
        }
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = self.$field { c.$field = v; } )* };
        }
        take!(
            n_fractions,
            kappa,
            epsilon_train,
            epsilon_eval,
            value_lr,
            fraction_lr,
            target_sync,
            entropy_coeff,
            hidden,
            n_basis
        );
        Ok(c)
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSection {
    pub kinds: Vec<String>,
    pub n: Vec<usize>,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { kinds: AgentKind::ALL.iter().map(|k| k.name().to_owned()).collect(), n: vec![8] }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        if config.schema_version != SCHEMA_VERSION {
            return Err(HarnessError::Config(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                config.schema_version
            )));
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut config = Self::from_toml(&text).map_err(|e| match e {
            HarnessError::Config(msg) => HarnessError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })?;
        config.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(config)
    }

    /// Checks settings shared by all commands and those of `kind`.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        if let Some(declared) = self.kind {
            if declared != kind {
                return bad(format!("config is for `{}` but `{}` was requested", declared.name(), kind.name()));
            }
        }
        if self.seeds.is_empty() {
            return bad("at least one seed is required".into());
        }
        match kind {
            ExperimentKind::Approx => {
                if self.approx.random_draws == 0 || self.approx.steps == 0 {
                    return bad("approx.steps and approx.random_draws must be positive".into());
                }
                if let Some(&n) = self.approx.n.iter().find(|&&n| n < 2) {
                    return bad(format!("approx.n entries must be at least 2, got {n}"));
                }
                for name in &self.approx.distributions {
                    crate::distributions::by_name(name)?;
                }
                self.optimizer.build(self.approx.steps)?;
            }
            ExperimentKind::Optimize => {
                crate::distributions::by_name(&self.optimize.distribution)?;
                if self.optimize.n < 2 || self.optimize.steps == 0 {
                    return bad("optimize.n must be at least 2 and optimize.steps positive".into());
                }
                if let Some(logits) = &self.optimize.init_logits {
                    if logits.len() != self.optimize.n {
                        return bad(format!(
                            "optimize.init_logits has {} entries, expected {}",
                            logits.len(),
                            self.optimize.n
                        ));
                    }
                }
                self.optimizer.build(self.optimize.steps)?;
            }
            ExperimentKind::Gradcheck => {
                let g = &self.gradcheck;
                if g.tolerance.is_nan() || g.tolerance <= 0.0 {
                    return bad("gradcheck.tolerance must be positive".into());
                }
            }
            ExperimentKind::Train | ExperimentKind::Sweep => {
                let t = &self.train;
                if t.updates == 0 || t.eval_episodes == 0 || t.mc_draws == 0 {
                    return bad("train.updates, train.eval_episodes and train.mc_draws must be positive".into());
                }
                t.agent.apply(AgentConfig::default())?.validate()?;
                if kind == ExperimentKind::Sweep {
                    for k in &self.sweep.kinds {
                        parse_kind(k)?;
                    }
                    if self.sweep.n.contains(&0) {
                        return bad("sweep.n entries must be positive".into());
                    }
                }
            }
        }
        Ok(())
    }

    pub fn experiment_id(&self, kind: ExperimentKind) -> String {
        self.id.clone().unwrap_or_else(|| kind.name().to_owned())
    }
}
