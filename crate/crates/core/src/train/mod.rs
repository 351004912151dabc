//! Training, evaluation, and the paired guide-branch ablation harness.

mod ablate;
mod bridge;
mod config;
mod eval;
mod trainer;

pub use ablate::{ablate, ablate_on_pairs, AblateError, AblationReport, AblationRow};
pub use bridge::{images_to_tensor, tensor_sample_to_rgb};
pub use config::{ConfigError, TrainConfig};
pub use eval::{evaluate, evaluate_pairs, restore_image, EvalEntry, EvalError, EvalReport};
pub use trainer::{train, train_on_pairs, LogEntry, TrainError, TrainOutcome};
