//! `derain`: one entry point for the deraining toolkit. Subcommands glue
//! the filtering, synthesis, training, and scoring modules into batch
//! workflows; exit code 0 means success, 1 a usage error, 2 a runtime
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use derain_core::data::{load_manifest, synthesize_rain_seeded, RainSynthParams};
use derain_core::filter::{decompose, decompose_luma_guided, encode_high, FilterParams};
use derain_core::image::{load_image, save_image};
use derain_core::metrics::{psnr, ssim, SsimParams};
use derain_core::nn::checkpoint;
use derain_core::train::{ablate, evaluate, restore_image, train, TrainConfig};

#[derive(Parser)]
#[command(
    name = "derain",
    version,
    about = "Single-image deraining: guided decomposition, streak synthesis, training, restoration, and scoring"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Split an image into a smooth base and an offset-encoded detail layer
    Decompose(DecomposeArgs),
    /// Render synthetic rain streaks over a clean image
    Synth(SynthArgs),
    /// Train a restoration network on a manifest of rainy/clean pairs
    Train(TrainArgs),
    /// Restore a rainy image with a trained checkpoint
    Infer(InferArgs),
    /// Score a checkpoint against a manifest of rainy/clean pairs
    Eval(EvalArgs),
    /// Train with and without the detail-guide branch and compare
    Ablate(AblateArgs),
    /// Print PSNR and SSIM between two images
    Metrics(MetricsArgs),
}

/// Smoothing-filter parameters shared by every subcommand that runs the
/// base/detail decomposition.
#[derive(Args)]
struct FilterArgs {
    /// Window radius of the guided smoothing filter
    #[arg(long, default_value_t = FilterParams::default().zeta)]
    radius: usize,

    /// Ridge regularization on the per-window linear fit
    #[arg(long, default_value_t = FilterParams::default().lambda)]
    lambda: f64,

    /// Stabilizer inside the edge-aware variance weights
    #[arg(long, default_value_t = FilterParams::default().epsilon)]
    epsilon: f64,

    /// Residual-energy scale of the aggregation weights
    #[arg(long, default_value_t = FilterParams::default().eta)]
    eta: f64,
}

impl FilterArgs {
    fn params(&self) -> FilterParams {
        FilterParams {
            zeta: self.radius,
            lambda: self.lambda,
            epsilon: self.epsilon,
            eta: self.eta,
        }
    }
}

#[derive(Args)]
struct DecomposeArgs {
    /// Input image (png, ppm, or pgm)
    #[arg(long)]
    input: PathBuf,

    /// Output path for the base layer
    #[arg(long)]
    base: PathBuf,

    /// Output path for the detail layer, offset-encoded around mid-gray
    #[arg(long)]
    high: PathBuf,

    /// Guide every channel with the luminance plane instead of itself
    #[arg(long)]
    luma_guide: bool,

    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct SynthArgs {
    /// Clean input image
    #[arg(long)]
    clean: PathBuf,

    /// Output path for the rainy rendering
    #[arg(long)]
    out_rainy: PathBuf,

    /// Streaks per thousand pixels
    #[arg(long, default_value_t = RainSynthParams::default().density)]
    density: f64,

    /// Streak length in pixels
    #[arg(long, default_value_t = RainSynthParams::default().length)]
    length: usize,

    /// Lower bound of the streak angle in degrees
    #[arg(long, default_value_t = RainSynthParams::default().angle_min_deg)]
    angle_min: f64,

    /// Upper bound of the streak angle in degrees
    #[arg(long, default_value_t = RainSynthParams::default().angle_max_deg)]
    angle_max: f64,

    /// Maximum streak amplitude
    #[arg(long, default_value_t = RainSynthParams::default().intensity)]
    intensity: f64,

    /// Gaussian blur applied to the streak layer
    #[arg(long, default_value_t = RainSynthParams::default().blur_sigma)]
    blur_sigma: f64,

    /// Seed for the streak generator
    #[arg(long, default_value_t = RainSynthParams::default().seed)]
    seed: u64,
}

/// Base profile a training configuration starts from before file and
/// key=value overrides are applied.
#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Full-scale defaults (4 groups x 8 blocks, 64 channels, crop 128)
    Full,
    /// Small profile for quick experiments (1 group x 2 blocks, 16 channels, crop 64)
    Desk,
}

/// Training-configuration sources, applied in order: preset, then config
/// file, then each --set override.
#[derive(Args)]
struct ConfigArgs {
    /// Base configuration profile
    #[arg(long, value_enum, default_value_t = Preset::Full)]
    preset: Preset,

    /// key = value config file layered over the preset
    #[arg(long)]
    config: Option<PathBuf>,

    /// Final override as key=value (repeatable); same keys as the config file
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

impl ConfigArgs {
    fn build(&self) -> Result<TrainConfig> {
        let mut config = match self.preset {
            Preset::Full => TrainConfig::full_scale(),
            Preset::Desk => TrainConfig::desk(),
        };
        if let Some(path) = &self.config {
            config.apply_file(path)?;
        }
        for kv in &self.set {
            let (key, value) = kv
                .split_once('=')
                .with_context(|| format!("--set {kv} is not of the form key=value"))?;
            config.apply_kv(key.trim(), value.trim())?;
        }
        config.validate()?;
        Ok(config)
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Manifest of `rainy<TAB>clean` training pairs
    #[arg(long)]
    manifest: PathBuf,

    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct InferArgs {
    /// Rainy input image
    #[arg(long)]
    input: PathBuf,

    /// Output path for the restored image
    #[arg(long)]
    output: PathBuf,

    /// Trained checkpoint
    #[arg(long)]
    checkpoint: PathBuf,

    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct EvalArgs {
    /// Checkpoint to score
    #[arg(long)]
    checkpoint: PathBuf,

    /// Manifest of `rainy<TAB>clean` evaluation pairs
    #[arg(long)]
    manifest: PathBuf,

    #[command(flatten)]
    filter: FilterArgs,
}

#[derive(Args)]
struct AblateArgs {
    /// Manifest of `rainy<TAB>clean` training pairs
    #[arg(long)]
    manifest: PathBuf,

    /// Output path for the tab-separated comparison table
    #[arg(long, default_value = "ablation.tsv")]
    report: PathBuf,

    /// Directory for the per-run checkpoints
    #[arg(long, default_value = "ablation-work")]
    work_dir: PathBuf,

    /// Seeds to repeat the paired comparison over
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    seeds: Vec<u64>,

    #[command(flatten)]
    config: ConfigArgs,
}

#[derive(Args)]
struct MetricsArgs {
    /// Reference image
    #[arg(long = "ref")]
    reference: PathBuf,

    /// Image under test
    #[arg(long = "test")]
    test: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // Usage problems exit 1; --help and --version are successes.
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Decompose(a) => run_decompose(&a),
        Command::Synth(a) => run_synth(&a),
        Command::Train(a) => run_train(&a),
        Command::Infer(a) => run_infer(&a),
        Command::Eval(a) => run_eval(&a),
        Command::Ablate(a) => run_ablate(&a),
        Command::Metrics(a) => run_metrics(&a),
    }
}

fn run_decompose(a: &DecomposeArgs) -> Result<()> {
    let img = load_image(&a.input)?;
    let params = a.filter.params();
    let split = if a.luma_guide {
        decompose_luma_guided(&img, &params)?
    } else {
        decompose(&img, &params)?
    };
    save_image(&split.base, &a.base)?;
    save_image(&encode_high(&split.high), &a.high)?;
    Ok(())
}

fn run_synth(a: &SynthArgs) -> Result<()> {
    let params = RainSynthParams {
        density: a.density,
        length: a.length,
        angle_min_deg: a.angle_min,
        angle_max_deg: a.angle_max,
        intensity: a.intensity,
        blur_sigma: a.blur_sigma,
        seed: a.seed,
    };
    params.validate()?;
    let clean = load_image(&a.clean)?;
    let pair = synthesize_rain_seeded(&clean, &params);
    save_image(&pair.rainy, &a.out_rainy)?;
    Ok(())
}

fn run_train(a: &TrainArgs) -> Result<()> {
    let config = a.config.build()?;
    let manifest = load_manifest(&a.manifest)?;
    let outcome = train(&config, &manifest, |entry| println!("{entry}"))?;
    println!(
        "checkpoint: {} (steps={})",
        config.checkpoint_path.display(),
        outcome.train_steps
    );
    Ok(())
}

fn run_infer(a: &InferArgs) -> Result<()> {
    let ckpt = checkpoint::load(&a.checkpoint)?;
    let rainy = load_image(&a.input)?;
    let restored = restore_image(&ckpt.network, &a.filter.params(), &rainy)?;
    save_image(&restored, &a.output)?;
    Ok(())
}

fn run_eval(a: &EvalArgs) -> Result<()> {
    let ckpt = checkpoint::load(&a.checkpoint)?;
    let manifest = load_manifest(&a.manifest)?;
    let report = evaluate(&ckpt, &a.filter.params(), &manifest)?;
    for (entry, scores) in manifest.entries.iter().zip(&report.per_image) {
        println!(
            "{}: PSNR={:.4} dB SSIM={:.4}",
            entry.rainy.display(),
            scores.psnr,
            scores.ssim
        );
    }
    println!(
        "mean: PSNR={:.4} dB SSIM={:.4}",
        report.mean_psnr, report.mean_ssim
    );
    println!("network: {}", report.fingerprint);
    Ok(())
}

fn run_ablate(a: &AblateArgs) -> Result<()> {
    let config = a.config.build()?;
    let manifest = load_manifest(&a.manifest)?;
    let report = ablate(
        &config,
        &manifest,
        &a.seeds,
        &a.work_dir,
        |seed, with, entry| {
            let variant = if with { "with-guide" } else { "without-guide" };
            println!("[seed {seed} {variant}] {entry}");
        },
    )?;
    report
        .write_tsv(&a.report)
        .with_context(|| format!("cannot write {}", a.report.display()))?;
    print!("{}", report.to_tsv());
    Ok(())
}

fn run_metrics(a: &MetricsArgs) -> Result<()> {
    let reference = load_image(&a.reference)?;
    let test = load_image(&a.test)?;
    let p = psnr(&reference, &test, 1.0)?;
    let s = ssim(&reference, &test, &SsimParams::default())?;
    println!("PSNR={p:.4} dB SSIM={s:.4}");
    Ok(())
}
