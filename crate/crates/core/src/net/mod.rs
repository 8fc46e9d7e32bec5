//! Quantile value network with a cosine fraction embedding, hand-written
//! backpropagation, and the quantile-Huber regression loss.

mod loss;
mod network;

pub use loss::{
    action_value, quantile_huber, quantile_huber_derivative, quantile_loss, quantile_loss_gradient, td_error_matrix,
    HuberParams,
};
pub use network::{cosine_basis, BackwardItem, CosineEmbedding, ForwardCache, NetShape, QuantileValueNet};
