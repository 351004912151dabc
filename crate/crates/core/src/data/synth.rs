//! Synthetic rain-streak generation.
//!
//! Streaks are bright additive line segments: a non-negative layer S is
//! stamped, softened with a gaussian blur, and added to every channel of
//! the clean image, so `rainy = clamp(clean + S, 0, 1)` and no pixel ever
//! moves below its clean value. Streak count scales with image area
//! (density is per kilo-pixel), which keeps the look stable across sizes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::image::{ImagePlane, ImageRgb};

use super::SamplePair;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RainSynthParams {
    /// Streak count per 1000 pixels of image area.
    pub density: f64,
    /// Streak length in pixels.
    pub length: usize,
    /// Lower bound of the streak angle in degrees (0 = horizontal, 90 = vertical).
    pub angle_min_deg: f64,
    /// Upper bound of the streak angle in degrees.
    pub angle_max_deg: f64,
    /// Per-streak brightness is drawn uniformly from [0, intensity].
    pub intensity: f64,
    /// Standard deviation of the gaussian blur applied to the streak layer.
    pub blur_sigma: f64,
    /// Seed used by [`synthesize_rain_seeded`].
    pub seed: u64,
}

impl Default for RainSynthParams {
    fn default() -> Self {
        Self {
            density: 2.0,
            length: 12,
            angle_min_deg: 70.0,
            angle_max_deg: 110.0,
            intensity: 0.6,
            blur_sigma: 0.7,
            seed: 0,
        }
    }
}

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid rain synthesis parameter {name}: {value}")]
    InvalidParams { name: &'static str, value: f64 },
}

impl RainSynthParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |name: &'static str, value: f64| Err(SynthError::InvalidParams { name, value });
        if !self.density.is_finite() || self.density < 0.0 {
            return bad("density", self.density);
        }
        if self.length == 0 {
            return bad("length", 0.0);
        }
        if !self.intensity.is_finite() || !(0.0..=1.0).contains(&self.intensity) {
            return bad("intensity", self.intensity);
        }
        if !self.angle_min_deg.is_finite() || !self.angle_max_deg.is_finite() {
            return bad("angle_min_deg", self.angle_min_deg);
        }
        if self.angle_min_deg > self.angle_max_deg {
            return bad("angle_max_deg", self.angle_max_deg);
        }
        if !self.blur_sigma.is_finite() || self.blur_sigma < 0.0 {
            return bad("blur_sigma", self.blur_sigma);
        }
        Ok(())
    }
}

/// A synthesized pair together with the pre-clamp streak layer, kept for
/// diagnostics (e.g. checking how much streak energy a filter captures).
#[derive(Debug, Clone)]
pub struct SynthesizedPair {
    pub pair: SamplePair,
    pub streak_layer: ImagePlane<f64>,
}

fn stamp_streaks(w: usize, h: usize, p: &RainSynthParams, rng: &mut impl Rng) -> ImagePlane<f64> {
    let mut s: ImagePlane<f64> = ImagePlane::zeros(w, h);
    let count = (p.density * (w as f64 * h as f64) / 1000.0).round() as usize;
    for _ in 0..count {
        let cx = rng.gen_range(0..w) as f64;
        let cy = rng.gen_range(0..h) as f64;
        let angle = rng
            .gen_range(p.angle_min_deg..=p.angle_max_deg)
            .to_radians();
        let amp = rng.gen::<f64>() * p.intensity;
        let (dx, dy) = (angle.cos(), angle.sin());
        // Half-pixel steps along the segment avoid gaps at any angle.
        let n_sub = 2 * p.length;
        for sub in 0..=n_sub {
            let t = sub as f64 / 2.0 - p.length as f64 / 2.0;
            let px = (cx + t * dx).round();
            let py = (cy + t * dy).round();
            if px >= 0.0 && py >= 0.0 && (px as usize) < w && (py as usize) < h {
                let (x, y) = (px as usize, py as usize);
                // max, not +=, so crossing streaks stay within [0, intensity]
                s.set(x, y, s.get(x, y).max(amp));
            }
        }
    }
    s
}

fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let mut taps: Vec<f64> = (-radius..=radius)
        .map(|i| (-(i as f64).powi(2) / (2.0 * sigma * sigma)).exp())
        .collect();
    let norm: f64 = taps.iter().sum();
    for t in &mut taps {
        *t /= norm;
    }
    taps
}

fn blur_plane(src: &ImagePlane<f64>, sigma: f64) -> ImagePlane<f64> {
    if sigma <= 0.0 {
        return src.clone();
    }
    let taps = gaussian_kernel(sigma);
    let radius = (taps.len() / 2) as i64;
    let (w, h) = (src.width(), src.height());
    // Separable pass with zero padding; all taps are positive so the
    // result stays non-negative.
    let horizontal = ImagePlane::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (i, tap) in taps.iter().enumerate() {
            let sx = x as i64 + i as i64 - radius;
            if sx >= 0 && (sx as usize) < w {
                acc += tap * src.get(sx as usize, y);
            }
        }
        acc
    });
    ImagePlane::from_fn(w, h, |x, y| {
        let mut acc = 0.0;
        for (i, tap) in taps.iter().enumerate() {
            let sy = y as i64 + i as i64 - radius;
            if sy >= 0 && (sy as usize) < h {
                acc += tap * horizontal.get(x, sy as usize);
            }
        }
        acc
    })
}

/// Builds a rainy/clean pair and keeps the pre-clamp streak layer.
pub fn synthesize_rain_detailed(
    clean: &ImageRgb<f64>,
    p: &RainSynthParams,
    rng: &mut impl Rng,
) -> SynthesizedPair {
    p.validate().expect("invalid rain synthesis parameters");
    let (w, h) = (clean.width(), clean.height());
    let stamped = stamp_streaks(w, h, p, rng);
    let streak_layer = blur_plane(&stamped, p.blur_sigma);
    let add =
        |plane: &ImagePlane<f64>| plane.zip_map(&streak_layer, |v, s| (v + s).clamp(0.0, 1.0));
    let rainy = ImageRgb::new(add(clean.r()), add(clean.g()), add(clean.b()));
    SynthesizedPair {
        pair: SamplePair::new(rainy, clean.clone()),
        streak_layer,
    }
}

/// Builds a rainy/clean pair from an explicit rng stream.
pub fn synthesize_rain(
    clean: &ImageRgb<f64>,
    p: &RainSynthParams,
    rng: &mut impl Rng,
) -> SamplePair {
    synthesize_rain_detailed(clean, p, rng).pair
}

/// Builds a rainy/clean pair from the seed carried in the parameters.
pub fn synthesize_rain_seeded(clean: &ImageRgb<f64>, p: &RainSynthParams) -> SamplePair {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    synthesize_rain(clean, p, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::psnr;

    fn mid_gray(w: usize, h: usize) -> ImageRgb<f64> {
        ImageRgb::constant(w, h, 0.5)
    }

    fn gradient_image(w: usize, h: usize) -> ImageRgb<f64> {
        ImageRgb::new(
            ImagePlane::from_fn(w, h, |x, _| x as f64 / w as f64),
            ImagePlane::from_fn(w, h, |_, y| y as f64 / h as f64),
            ImagePlane::from_fn(w, h, |x, y| ((x + y) % 7) as f64 / 7.0),
        )
    }

    #[test]
    fn zero_density_leaves_the_image_untouched() {
        let clean = gradient_image(32, 24);
        let p = RainSynthParams {
            density: 0.0,
            ..RainSynthParams::default()
        };
        let pair = synthesize_rain_seeded(&clean, &p);
        assert_eq!(pair.rainy.max_abs_diff(&clean), 0.0);
        assert_eq!(pair.clean.max_abs_diff(&clean), 0.0);
    }

    #[test]
    fn zero_intensity_leaves_the_image_untouched() {
        let clean = gradient_image(32, 24);
        let p = RainSynthParams {
            intensity: 0.0,
            ..RainSynthParams::default()
        };
        let pair = synthesize_rain_seeded(&clean, &p);
        assert_eq!(pair.rainy.max_abs_diff(&clean), 0.0);
    }

    #[test]
    fn fixed_seed_reproduces_bit_identical_pairs() {
        let clean = gradient_image(48, 40);
        let p = RainSynthParams::default();
        let a = synthesize_rain_seeded(&clean, &p);
        let b = synthesize_rain_seeded(&clean, &p);
        assert_eq!(a.rainy.max_abs_diff(&b.rainy), 0.0);
        let other = synthesize_rain_seeded(&clean, &RainSynthParams { seed: 1, ..p });
        assert!(other.rainy.max_abs_diff(&a.rainy) > 0.0);
    }

    #[test]
    fn streaks_are_additive_and_non_negative() {
        let clean = gradient_image(64, 64);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let detailed = synthesize_rain_detailed(&clean, &RainSynthParams::default(), &mut rng);
        let s = &detailed.streak_layer;
        assert!(s.data().iter().all(|&v| v >= 0.0));
        assert!(s.data().iter().any(|&v| v > 0.0), "no streaks stamped");
        let rainy = &detailed.pair.rainy;
        for ch in 0..3 {
            rainy
                .channel(ch)
                .data()
                .iter()
                .zip(clean.channel(ch).data())
                .for_each(|(&r, &c)| {
                    assert!(r >= c - 1e-15, "pixel moved downward: {r} < {c}");
                    assert!((0.0..=1.0).contains(&r));
                });
        }
    }

    #[test]
    fn heavier_rain_lowers_psnr_monotonically() {
        let clean = mid_gray(64, 64);
        let mut last = f64::INFINITY;
        for density in [2.0, 4.0, 8.0] {
            let p = RainSynthParams {
                density,
                seed: 11,
                ..RainSynthParams::default()
            };
            let pair = synthesize_rain_seeded(&clean, &p);
            let value = psnr(&pair.rainy, &pair.clean, 1.0).unwrap();
            assert!(value.is_finite());
            assert!(value < last, "density {density}: {value} !< {last}");
            last = value;
        }
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let cases = [
            RainSynthParams {
                density: -1.0,
                ..RainSynthParams::default()
            },
            RainSynthParams {
                length: 0,
                ..RainSynthParams::default()
            },
            RainSynthParams {
                intensity: 1.5,
                ..RainSynthParams::default()
            },
            RainSynthParams {
                angle_min_deg: 120.0,
                angle_max_deg: 60.0,
                ..RainSynthParams::default()
            },
            RainSynthParams {
                blur_sigma: -0.1,
                ..RainSynthParams::default()
            },
        ];
        for p in cases {
            assert!(p.validate().is_err(), "{p:?} should be invalid");
        }
    }
}
