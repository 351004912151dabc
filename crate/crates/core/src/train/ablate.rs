//! Paired ablation of the high-frequency guide branch: per seed, train
//! twice from identical initialization and identical batch streams, once
//! with the guide blocks and once without, then score both on the same
//! set. Equality of the two runs' batch digests is asserted, so any
//! reported difference is attributable to the branch alone.

use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::data::{load_pair, DataError, DatasetManifest, SamplePair};

use super::config::TrainConfig;
use super::eval::{evaluate_pairs, EvalError};
use super::trainer::{train_on_pairs, LogEntry, TrainError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AblationRow {
    pub seed: u64,
    pub with_rsgb: bool,
    pub mean_psnr: f64,
    pub mean_ssim: f64,
}

#[derive(Debug, Clone)]
pub struct AblationReport {
    /// Two rows per seed, the with-guide row first.
    pub rows: Vec<AblationRow>,
    pub mean_with_psnr: f64,
    pub mean_without_psnr: f64,
    pub mean_with_ssim: f64,
    pub mean_without_ssim: f64,
    /// Seeds where the with-guide run scored at least as high in PSNR.
    pub wins_with: usize,
    pub seeds: usize,
}

impl AblationReport {
    /// Tab-separated table: a header, two data rows per seed, and two
    /// aggregate mean rows.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("seed\tvariant\tpsnr_db\tssim\n");
        let variant = |w: bool| if w { "with-rsgb" } else { "without-rsgb" };
        for row in &self.rows {
            out.push_str(&format!(
                "{}\t{}\t{:.4}\t{:.6}\n",
                row.seed,
                variant(row.with_rsgb),
                row.mean_psnr,
                row.mean_ssim
            ));
        }
        out.push_str(&format!(
            "mean\twith-rsgb\t{:.4}\t{:.6}\n",
            self.mean_with_psnr, self.mean_with_ssim
        ));
        out.push_str(&format!(
            "mean\twithout-rsgb\t{:.4}\t{:.6}\n",
            self.mean_without_psnr, self.mean_without_ssim
        ));
        out
    }

    pub fn write_tsv(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_tsv())
    }
}

#[derive(Debug, Error)]
pub enum AblateError {
    #[error(transparent)]
    Train(#[from] TrainError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error("seed {seed}: paired runs consumed different batch streams")]
    DigestMismatch { seed: u64 },
    #[error("ablation needs at least one seed")]
    NoSeeds,
    #[error("cannot prepare work directory {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Runs the paired experiment over in-memory pairs; checkpoints land in
/// `work_dir`, named by seed and variant. Scores are computed on the
/// training pairs themselves (the harness is a controlled comparison,
/// not a generalization test).
pub fn ablate_on_pairs(
    base: &TrainConfig,
    pairs: &[SamplePair],
    seeds: &[u64],
    work_dir: &Path,
    mut on_log: impl FnMut(u64, bool, &LogEntry),
) -> Result<AblationReport, AblateError> {
    if seeds.is_empty() {
        return Err(AblateError::NoSeeds);
    }
    std::fs::create_dir_all(work_dir).map_err(|source| AblateError::Io {
        path: work_dir.to_path_buf(),
        source,
    })?;

    let mut rows = Vec::with_capacity(seeds.len() * 2);
    let mut wins_with = 0;
    for &seed in seeds {
        let mut run = |with_rsgb: bool| -> Result<(AblationRow, String), AblateError> {
            let mut config = base.clone();
            config.seed = seed;
            config.network.use_rsgb = with_rsgb;
            let variant = if with_rsgb { "with" } else { "without" };
            config.checkpoint_path = work_dir.join(format!("seed{seed}-{variant}-rsgb.ckpt"));
            let outcome = train_on_pairs(&config, pairs, |e| on_log(seed, with_rsgb, e))?;
            let report = evaluate_pairs(&outcome.network, &config.filter, pairs)?;
            let row = AblationRow {
                seed,
                with_rsgb,
                mean_psnr: report.mean_psnr,
                mean_ssim: report.mean_ssim,
            };
            Ok((row, outcome.batch_digest))
        };
        let (with, digest_with) = run(true)?;
        let (without, digest_without) = run(false)?;
        if digest_with != digest_without {
            return Err(AblateError::DigestMismatch { seed });
        }
        rows.push(with);
        rows.push(without);
        if with.mean_psnr >= without.mean_psnr {
            wins_with += 1;
        }
    }

    let seed_count = seeds.len() as f64;
    let mean = |want: bool, f: fn(&AblationRow) -> f64| {
        rows.iter()
            .filter(|r| r.with_rsgb == want)
            .map(f)
            .sum::<f64>()
            / seed_count
    };
    Ok(AblationReport {
        mean_with_psnr: mean(true, |r| r.mean_psnr),
        mean_without_psnr: mean(false, |r| r.mean_psnr),
        mean_with_ssim: mean(true, |r| r.mean_ssim),
        mean_without_ssim: mean(false, |r| r.mean_ssim),
        wins_with,
        seeds: seeds.len(),
        rows,
    })
}

/// Manifest-file front end for [`ablate_on_pairs`].
pub fn ablate(
    base: &TrainConfig,
    manifest: &DatasetManifest,
    seeds: &[u64],
    work_dir: &Path,
    on_log: impl FnMut(u64, bool, &LogEntry),
) -> Result<AblationReport, AblateError> {
    let mut pairs = Vec::with_capacity(manifest.len());
    for entry in &manifest.entries {
        pairs.push(load_pair(entry)?);
    }
    ablate_on_pairs(base, &pairs, seeds, work_dir, on_log)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{synthesize_rain_seeded, RainSynthParams};
    use crate::image::{save_image, ImagePlane, ImageRgb};
    use crate::nn::NetworkConfig;

    fn tiny_config(work: &Path) -> TrainConfig {
        let mut c = TrainConfig::desk();
        c.network = NetworkConfig {
            n_rrg: 1,
            n_dab_per_rrg: 1,
            channels: 4,
            ca_reduction: 1,
            sa_kernel: 3,
            use_rsgb: true,
        };
        c.filter.zeta = 2;
        c.crop = 16;
        c.batch = 1;
        c.total_steps = 2;
        c.log_interval = 1;
        c.checkpoint_path = work.join("unused.ckpt");
        c
    }

    fn toy_pairs() -> Vec<SamplePair> {
        (0..2u64)
            .map(|k| {
                let clean = ImageRgb::new(
                    ImagePlane::from_fn(16, 16, |x, y| ((x + y + k as usize) % 9) as f64 / 12.0),
                    ImagePlane::constant(16, 16, 0.35),
                    ImagePlane::from_fn(16, 16, |x, _| x as f64 / 20.0),
                );
                synthesize_rain_seeded(
                    &clean,
                    &RainSynthParams {
                        seed: k,
                        ..RainSynthParams::default()
                    },
                )
            })
            .collect()
    }

    #[test]
    fn paired_runs_share_batches_and_fill_the_report() {
        let dir = tempfile::tempdir().unwrap();
        let work = dir.path().join("work");
        let config = tiny_config(&work);
        let pairs = toy_pairs();
        let mut log_lines = 0;
        let report =
            ablate_on_pairs(&config, &pairs, &[3, 4], &work, |_, _, _| log_lines += 1).unwrap();

        assert_eq!(report.rows.len(), 4);
        assert_eq!(report.seeds, 2);
        assert!(report.wins_with <= 2);
        assert!(report.rows[0].with_rsgb && !report.rows[1].with_rsgb);
        assert_eq!(report.rows[0].seed, 3);
        assert_eq!(report.rows[2].seed, 4);
        // 2 steps x 2 variants x 2 seeds, log interval 1.
        assert_eq!(log_lines, 8);

        let expected_mean = (report.rows[0].mean_psnr + report.rows[2].mean_psnr) / 2.0;
        assert!((report.mean_with_psnr - expected_mean).abs() <= 1e-12);

        for seed in [3, 4] {
            for variant in ["with", "without"] {
                let path = work.join(format!("seed{seed}-{variant}-rsgb.ckpt"));
                assert!(path.exists(), "missing checkpoint {}", path.display());
            }
        }

        let tsv = report.to_tsv();
        let lines: Vec<&str> = tsv.lines().collect();
        assert_eq!(lines.len(), 1 + 4 + 2);
        assert_eq!(lines[0], "seed\tvariant\tpsnr_db\tssim");
        assert!(lines[1].starts_with("3\twith-rsgb\t"));
        assert!(lines[5].starts_with("mean\twith-rsgb\t"));
        assert!(lines[6].starts_with("mean\twithout-rsgb\t"));
        for line in &lines[1..] {
            assert_eq!(line.split('\t').count(), 4, "bad column count: {line}");
        }
    }

    #[test]
    fn manifest_front_end_matches_the_pairs_run() {
        let dir = tempfile::tempdir().unwrap();
        let pairs = toy_pairs();
        let mut manifest_text = String::new();
        for (k, pair) in pairs.iter().enumerate() {
            let rainy = dir.path().join(format!("rainy{k}.png"));
            let clean = dir.path().join(format!("clean{k}.png"));
            save_image(&pair.rainy, &rainy).unwrap();
            save_image(&pair.clean, &clean).unwrap();
            manifest_text.push_str(&format!("rainy{k}.png\tclean{k}.png\n"));
        }
        let manifest_path = dir.path().join("set.txt");
        std::fs::write(&manifest_path, manifest_text).unwrap();
        let manifest = crate::data::load_manifest(&manifest_path).unwrap();

        let work = dir.path().join("work");
        let config = tiny_config(&work);
        let report = ablate(&config, &manifest, &[7], &work, |_, _, _| {}).unwrap();
        assert_eq!(report.rows.len(), 2);
        assert_eq!(report.seeds, 1);
    }

    #[test]
    fn zero_seeds_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let config = tiny_config(dir.path());
        let err =
            ablate_on_pairs(&config, &toy_pairs(), &[], dir.path(), |_, _, _| {}).unwrap_err();
        assert!(matches!(err, AblateError::NoSeeds));
    }
}
