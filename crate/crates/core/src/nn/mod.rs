//! Trainable restoration stack: tensors, conv and attention layers, the
//! residual network built from them, its loss, the optimizer, gradient
//! checking, and checkpoint serialization.

mod attention;
mod blocks;
mod conv;
mod network;
mod param;
mod tensor;

pub mod checkpoint;
pub mod gradcheck;
pub mod loss;
pub mod optim;

#[cfg(test)]
pub(crate) mod testutil;

pub use attention::{CaCache, ChannelAttention, SaCache, SpatialAttention};
pub use blocks::{Dab, DabCache, Rrg, RrgCache, Rsgb, RsgbCache};
pub use conv::{relu, relu_backward, sigmoid, sigmoid_backward, Conv2d};
pub use network::{NetCache, Network, NetworkConfig};
pub use param::Param;
pub use tensor::Tensor;
