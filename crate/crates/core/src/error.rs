use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("empirical quantile function needs at least one sample")]
    EmptySamples,

    #[error("invalid fraction set: {0}")]
    InvalidFractions(String),

    #[error("length mismatch for {what}: expected {expected}, found {found}")]
    LengthMismatch { what: &'static str, expected: usize, found: usize },

    #[error("adaptive Simpson integration did not converge on segment {segment}")]
    IntegrationDiverged { segment: usize },

    #[error("logits must be finite")]
    NonFiniteLogits,

    #[error("fraction optimizer diverged at step {step} (|logit| = {max_logit:.3} > 50); try a smaller step size")]
    Diverged { step: usize, max_logit: f64 },

    #[error("non-finite loss {loss} at update {update} (mean |dW1/dtau| = {mean_tau_grad})")]
    NonFiniteLoss { update: u64, loss: f64, mean_tau_grad: f64 },

    #[error("action set is empty")]
    EmptyActions,

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("invalid agent configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown parameter {0:?}")]
    UnknownParameter(String),
}
