//! Fraction proposal: cumulative-softmax parameterization, entropy
//! regularization and 1-Wasserstein fraction optimization.

mod optimize;
mod proposer;

pub use crate::optim::{OptimizerState, StepSchedule};
pub use optimize::{grid_search_oracle, optimize_fractions, FractionOptimization, TracePoint, MAX_LOGIT, TRACE_EVERY};
pub use proposer::{entropy, fractions_from_logits, logit_gradient, softmax, FractionProposer};
