//! Fully parameterized quantile functions for distributional reinforcement
//! learning.
//!
//! A return distribution is approximated by a staircase quantile function:
//! `N` quantile values placed on `N` segments of the unit interval whose
//! boundaries (the quantile fractions) are themselves free parameters. This
//! crate provides
//!
//! * [`quantile`]: ground-truth quantile functions, fraction sets, staircase
//!   approximations, the 1-Wasserstein error and its fraction gradient;
//! * [`fraction`]: the cumulative-softmax fraction proposer and a first-order
//!   optimizer that drives fractions towards minimal 1-Wasserstein error;
//! * [`net`]: a small quantile value network with cosine fraction embedding,
//!   hand-derived backpropagation and the quantile-Huber loss;
//! * [`rl`]: toy MDPs with verifiable return distributions, a replay buffer and
//!   three agents (learned, fixed and sampled fractions) sharing one backbone.
//!
//! The crate is `no_std` and only needs `alloc`. All floating point math goes
//! through `libm` so results are bit-identical across targets.

#![no_std]
#![deny(unsafe_code)]
// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod audit;
pub mod error;
pub mod fraction;
pub mod net;
pub mod optim;
pub mod quadrature;
pub mod quantile;
pub mod rl;

pub use error::{Error, Result};
pub use fraction::{FractionProposer, OptimizerState};
pub use net::{CosineEmbedding, HuberParams, QuantileValueNet};
pub use quantile::{FractionSet, QuantileFunction, StaircaseApproximation};
pub use rl::{AgentConfig, AgentKind, ReplayBuffer, ToyMdp, Transition};
