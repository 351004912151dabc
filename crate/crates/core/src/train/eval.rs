//! Full-image evaluation: decompose, forward, clamp, score against clean.

use thiserror::Error;

use crate::data::{load_pair, DataError, DatasetManifest, SamplePair};
use crate::filter::{decompose, FilterError, FilterParams};
use crate::image::ImageRgb;
use crate::metrics::{psnr, ssim, MetricsError, SsimParams};
use crate::nn::checkpoint::Checkpoint;
use crate::nn::{Network, Tensor};

use super::bridge::{images_to_tensor, tensor_sample_to_rgb};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalEntry {
    pub psnr: f64,
    pub ssim: f64,
}

#[derive(Debug, Clone)]
pub struct EvalReport {
    pub per_image: Vec<EvalEntry>,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
    /// Network-shape fingerprint of the evaluated model.
    pub fingerprint: String,
}

#[derive(Debug, Error)]
pub enum EvalError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Filter(#[from] FilterError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("cannot evaluate on an empty dataset")]
    EmptyDataset,
}

/// Runs one full image through decompose + network and clamps the
/// restored output to [0, 1]. No cropping: the network is shape-agnostic.
pub fn restore_image(
    net: &Network<f32>,
    filter: &FilterParams,
    rainy: &ImageRgb<f64>,
) -> Result<ImageRgb<f64>, EvalError> {
    let hf = decompose(rainy, filter)?.high;
    let i: Tensor<f32> = images_to_tensor(&[rainy]);
    let hf_t: Tensor<f32> = images_to_tensor(&[&hf]);
    let (b_hat, _) = net.forward(&i, &hf_t);
    Ok(tensor_sample_to_rgb(&b_hat, 0).map(|v| v.clamp(0.0, 1.0)))
}

/// Scores the network on in-memory pairs.
pub fn evaluate_pairs(
    net: &Network<f32>,
    filter: &FilterParams,
    pairs: &[SamplePair],
) -> Result<EvalReport, EvalError> {
    if pairs.is_empty() {
        return Err(EvalError::EmptyDataset);
    }
    let ssim_params = SsimParams::default();
    let mut per_image = Vec::with_capacity(pairs.len());
    let mut sum_psnr = 0.0;
    let mut sum_ssim = 0.0;
    for pair in pairs {
        let restored = restore_image(net, filter, &pair.rainy)?;
        let entry = EvalEntry {
            psnr: psnr(&restored, &pair.clean, 1.0)?,
            ssim: ssim(&restored, &pair.clean, &ssim_params)?,
        };
        sum_psnr += entry.psnr;
        sum_ssim += entry.ssim;
        per_image.push(entry);
    }
    let n = per_image.len() as f64;
    Ok(EvalReport {
        per_image,
        mean_psnr: sum_psnr / n,
        mean_ssim: sum_ssim / n,
        fingerprint: net.config.fingerprint(),
    })
}

/// Scores a checkpointed network on every pair in the manifest. Reads
/// model state immutably; evaluation cannot alter the checkpoint.
pub fn evaluate(
    ckpt: &Checkpoint,
    filter: &FilterParams,
    manifest: &DatasetManifest,
) -> Result<EvalReport, EvalError> {
    let mut pairs = Vec::with_capacity(manifest.len());
    for entry in &manifest.entries {
        pairs.push(load_pair(entry)?);
    }
    evaluate_pairs(&ckpt.network, filter, &pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_rain_seeded, RainSynthParams};
    use crate::image::ImagePlane;
    use crate::nn::NetworkConfig;

    fn tiny_net() -> Network<f32> {
        Network::init(
            NetworkConfig {
                n_rrg: 1,
                n_dab_per_rrg: 1,
                channels: 4,
                ca_reduction: 1,
                sa_kernel: 3,
                use_rsgb: true,
            },
            5,
        )
    }

    fn small_filter() -> FilterParams {
        FilterParams {
            zeta: 2,
            ..FilterParams::default()
        }
    }

    fn synthetic_pair(seed: u64) -> SamplePair {
        let clean = ImageRgb::new(
            ImagePlane::from_fn(24, 24, |x, y| 0.2 + 0.5 * ((x * y) % 11) as f64 / 11.0),
            ImagePlane::constant(24, 24, 0.4),
            ImagePlane::from_fn(24, 24, |x, _| 0.1 + 0.7 * x as f64 / 24.0),
        );
        let p = RainSynthParams {
            seed,
            ..RainSynthParams::default()
        };
        synthesize_rain_seeded(&clean, &p)
    }

    #[test]
    fn fresh_network_scores_exactly_like_the_rainy_input() {
        // The zero-initialized head makes the network an identity map,
        // so the report must equal the rainy-vs-clean scores up to the
        // f32 round trip of the input.
        let net = tiny_net();
        let pair = synthetic_pair(1);
        let report = evaluate_pairs(&net, &small_filter(), std::slice::from_ref(&pair)).unwrap();
        let direct_psnr = psnr(&pair.rainy, &pair.clean, 1.0).unwrap();
        let direct_ssim = ssim(&pair.rainy, &pair.clean, &SsimParams::default()).unwrap();
        assert!((report.per_image[0].psnr - direct_psnr).abs() < 1e-4);
        assert!((report.per_image[0].ssim - direct_ssim).abs() < 1e-6);
        assert_eq!(report.mean_psnr, report.per_image[0].psnr);
        assert_eq!(report.mean_ssim, report.per_image[0].ssim);
    }

    #[test]
    fn means_are_the_arithmetic_mean_of_the_entries() {
        let net = tiny_net();
        let pairs: Vec<SamplePair> = (0..3).map(synthetic_pair).collect();
        let report = evaluate_pairs(&net, &small_filter(), &pairs).unwrap();
        assert_eq!(report.per_image.len(), 3);
        let mean_p: f64 =
            report.per_image.iter().map(|e| e.psnr).sum::<f64>() / report.per_image.len() as f64;
        let mean_s: f64 =
            report.per_image.iter().map(|e| e.ssim).sum::<f64>() / report.per_image.len() as f64;
        assert!((report.mean_psnr - mean_p).abs() <= 1e-9);
        assert!((report.mean_ssim - mean_s).abs() <= 1e-9);
    }

    #[test]
    fn report_carries_the_network_fingerprint() {
        let net = tiny_net();
        let report = evaluate_pairs(&net, &small_filter(), &[synthetic_pair(0)]).unwrap();
        assert_eq!(report.fingerprint, net.config.fingerprint());
        assert!(!report.fingerprint.is_empty());
    }

    #[test]
    fn empty_datasets_are_rejected() {
        let net = tiny_net();
        let err = evaluate_pairs(&net, &small_filter(), &[]).unwrap_err();
        assert!(matches!(err, EvalError::EmptyDataset));
    }

    #[test]
    fn restored_images_are_clamped() {
        let mut net = tiny_net();
        // Blow up the head so raw outputs leave [0, 1].
        net.visit_params(|name, p| {
            if name.starts_with("trunk_out") {
                for v in &mut p.values {
                    *v = 50.0;
                }
            }
        });
        let pair = synthetic_pair(2);
        let restored = restore_image(&net, &small_filter(), &pair.rainy).unwrap();
        for ch in 0..3 {
            assert!(restored
                .channel(ch)
                .data()
                .iter()
                .all(|v| (0.0..=1.0).contains(v)));
        }
    }
}
