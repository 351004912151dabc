//! Dataset plumbing: manifests of rainy/clean pairs, paired cropping with
//! flip augmentation, and a synthetic rain-streak generator so the whole
//! training loop runs without any external corpus.

mod crop;
mod manifest;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

use crate::image::{ImageIoError, ImageRgb};

pub use crop::{random_crop_pair, CropError};
pub use manifest::{load_manifest, DatasetManifest, ManifestEntry, ManifestError};
pub use synth::{
    synthesize_rain, synthesize_rain_detailed, synthesize_rain_seeded, RainSynthParams, SynthError,
    SynthesizedPair,
};

/// A rainy image and its clean counterpart, same dims by construction.
#[derive(Clone, Debug)]
pub struct SamplePair {
    pub rainy: ImageRgb<f64>,
    pub clean: ImageRgb<f64>,
}

impl SamplePair {
    /// Panics if dims differ; file-loaded pairs go through [`load_pair`],
    /// which reports the mismatch as an error instead.
    pub fn new(rainy: ImageRgb<f64>, clean: ImageRgb<f64>) -> Self {
        assert!(rainy.same_dims(&clean), "sample pair dims differ");
        SamplePair { rainy, clean }
    }

    pub fn width(&self) -> usize {
        self.rainy.width()
    }

    pub fn height(&self) -> usize {
        self.rainy.height()
    }
}

#[derive(Debug, Error)]
pub enum DataError {
    #[error(transparent)]
    Io(#[from] ImageIoError),
    #[error(
        "pair dims differ: {rainy_path} is {rainy_w}x{rainy_h}, {clean_path} is {clean_w}x{clean_h}"
    )]
    DimsMismatch {
        rainy_path: PathBuf,
        rainy_w: usize,
        rainy_h: usize,
        clean_path: PathBuf,
        clean_w: usize,
        clean_h: usize,
    },
}

/// Loads both images of a manifest entry and checks they pair up.
pub fn load_pair(entry: &ManifestEntry) -> Result<SamplePair, DataError> {
    let rainy = crate::image::load_image(&entry.rainy)?;
    let clean = crate::image::load_image(&entry.clean)?;
    if !rainy.same_dims(&clean) {
        return Err(DataError::DimsMismatch {
            rainy_path: entry.rainy.clone(),
            rainy_w: rainy.width(),
            rainy_h: rainy.height(),
            clean_path: entry.clean.clone(),
            clean_w: clean.width(),
            clean_h: clean.height(),
        });
    }
    Ok(SamplePair { rainy, clean })
}
