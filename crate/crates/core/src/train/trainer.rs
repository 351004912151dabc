//! The training loop: sample a batch, crop, split off the high-frequency
//! layer, forward, loss, backward, Adam step on a cosine schedule.
//!
//! Determinism contract: everything random flows from `config.seed` — the
//! parameter init derives per-layer streams from it, and the batch
//! sampler owns an independent stream — so two runs with one seed produce
//! bit-identical checkpoints, and toggling the high-frequency guide
//! branch on or off changes neither the shared-layer init nor the batch
//! sequence. A running digest over every batch byte makes the latter
//! checkable across runs.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{load_pair, random_crop_pair, CropError, DataError, DatasetManifest, SamplePair};
use crate::filter::{decompose, FilterError};
use crate::nn::checkpoint::{self, CheckpointError};
use crate::nn::loss::huber_loss;
use crate::nn::optim::{adam_step, cosine_lr, AdamState};
use crate::nn::{Network, Tensor};

use super::bridge::images_to_tensor;
use super::config::{ConfigError, TrainConfig};

/// Stream id for the batch sampler, fixed so the data sequence depends
/// only on the seed, never on the network shape.
const DATA_STREAM: u64 = 0xda7a;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogEntry {
    pub step: u32,
    pub lr: f64,
    pub loss: f64,
}

impl fmt::Display for LogEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step={} lr={} loss={}", self.step, self.lr, self.loss)
    }
}

#[derive(Debug)]
pub struct TrainOutcome {
    pub network: Network<f32>,
    pub optimizer: AdamState,
    pub train_steps: u32,
    /// Hex digest over every batch byte fed to the network, in order.
    pub batch_digest: String,
    pub logs: Vec<LogEntry>,
}

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Crop(#[from] CropError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("loss became non-finite ({loss}) at step {step}")]
    NonFiniteLoss { step: u32, loss: f64 },
    #[error("cannot train on an empty dataset")]
    EmptyDataset,
}

fn absorb_tensor(hasher: &mut Sha256, t: &Tensor<f32>) {
    let mut bytes = Vec::with_capacity(t.h() * t.w() * 4);
    for b in 0..t.n() {
        for ch in 0..t.c() {
            bytes.clear();
            for v in t.plane(b, ch) {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
            hasher.update(&bytes);
        }
    }
}

/// Trains on the pairs listed in `manifest`. All images are loaded up
/// front, so unreadable entries abort before any compute happens.
pub fn train(
    config: &TrainConfig,
    manifest: &DatasetManifest,
    on_log: impl FnMut(&LogEntry),
) -> Result<TrainOutcome, TrainError> {
    let mut pairs = Vec::with_capacity(manifest.len());
    for entry in &manifest.entries {
        pairs.push(load_pair(entry)?);
    }
    train_on_pairs(config, &pairs, on_log)
}

/// Trains on in-memory pairs; see [`train`].
pub fn train_on_pairs(
    config: &TrainConfig,
    pairs: &[SamplePair],
    mut on_log: impl FnMut(&LogEntry),
) -> Result<TrainOutcome, TrainError> {
    config.validate()?;
    if pairs.is_empty() {
        return Err(TrainError::EmptyDataset);
    }

    let mut net: Network<f32> = Network::init(config.network, config.seed);
    let mut adam = AdamState::default();
    let mut data_rng = ChaCha8Rng::seed_from_u64(config.seed);
    data_rng.set_stream(DATA_STREAM);
    let mut hasher = Sha256::new();
    let mut logs = Vec::new();

    let total = config.total_steps;
    let save_interval = (total / 10).max(1);

    for step in 0..total {
        let mut rainy_crops = Vec::with_capacity(config.batch);
        let mut clean_crops = Vec::with_capacity(config.batch);
        let mut hf_crops = Vec::with_capacity(config.batch);
        for _ in 0..config.batch {
            let idx = data_rng.gen_range(0..pairs.len());
            let crop = random_crop_pair(&pairs[idx], config.crop, &mut data_rng)?;
            hf_crops.push(decompose(&crop.rainy, &config.filter)?.high);
            rainy_crops.push(crop.rainy);
            clean_crops.push(crop.clean);
        }
        let i: Tensor<f32> = images_to_tensor(&rainy_crops.iter().collect::<Vec<_>>());
        let hf: Tensor<f32> = images_to_tensor(&hf_crops.iter().collect::<Vec<_>>());
        let b_true: Tensor<f32> = images_to_tensor(&clean_crops.iter().collect::<Vec<_>>());
        absorb_tensor(&mut hasher, &i);
        absorb_tensor(&mut hasher, &hf);
        absorb_tensor(&mut hasher, &b_true);

        let (b_hat, cache) = net.forward(&i, &hf);
        let (loss, d_bhat) = huber_loss(&b_hat, &b_true, config.loss_c);
        if !loss.is_finite() {
            return Err(TrainError::NonFiniteLoss { step, loss });
        }
        let lr = cosine_lr(step, total, config.lr_max, config.lr_min);
        if step % config.log_interval == 0 {
            let entry = LogEntry { step, lr, loss };
            on_log(&entry);
            logs.push(entry);
        }

        net.zero_grad();
        net.backward(&cache, &d_bhat);
        adam_step(&mut net, &mut adam, lr);

        let done = step + 1;
        if done % save_interval == 0 && done < total {
            checkpoint::save(&config.checkpoint_path, &mut net, Some(&adam), done)?;
        }
    }

    checkpoint::save(&config.checkpoint_path, &mut net, Some(&adam), total)?;
    let batch_digest = hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect();
    Ok(TrainOutcome {
        network: net,
        optimizer: adam,
        train_steps: total,
        batch_digest,
        logs,
    })
}
