//! Single-image rain removal toolkit.
//!
//! The pipeline splits a rainy image into a smooth base layer and a signed
//! high-frequency layer with an edge-aware weighted guided filter, feeds the
//! high-frequency layer to a small residual network that predicts the streak
//! map, and subtracts the prediction from the input. Everything runs on the
//! CPU in plain Rust; training, evaluation and the rain synthesizer live here
//! too so the whole loop is reproducible from a seed.

pub mod data;
pub mod filter;
pub mod image;
pub mod metrics;
pub mod nn;
pub mod real;
pub mod train;

pub use crate::image::{ImagePlane, ImageRgb};
pub use crate::nn::Tensor;
pub use crate::real::Real;

/// Scalar type used by the filtering and metrics stack.
pub type FilterScalar = f64;
/// Scalar type used for network training.
pub type TrainScalar = f32;

/// Single-channel image with `FilterScalar` samples.
pub type Plane = ImagePlane<FilterScalar>;
/// Three-channel image with `FilterScalar` samples.
pub type RgbImage = ImageRgb<FilterScalar>;
/// Network tensor at training precision.
pub type TrainTensor = Tensor<TrainScalar>;
