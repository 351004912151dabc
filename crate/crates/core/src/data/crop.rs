//! Paired random cropping with horizontal-flip augmentation.
//!
//! Both images of a pair get the same window and the same flip, so every
//! pixel relation between rainy and clean survives the augmentation. The
//! random draws happen in a fixed order (x, then y, then flip) to keep
//! the stream reproducible.

use rand::Rng;
use thiserror::Error;

use crate::image::{ImagePlane, ImageRgb};

use super::SamplePair;

#[derive(Debug, Error)]
pub enum CropError {
    #[error("image {width}x{height} is smaller than the {size}x{size} crop")]
    TooSmall {
        width: usize,
        height: usize,
        size: usize,
    },
}

fn crop_plane(
    src: &ImagePlane<f64>,
    x0: usize,
    y0: usize,
    size: usize,
    flip: bool,
) -> ImagePlane<f64> {
    ImagePlane::from_fn(size, size, |x, y| {
        let sx = if flip { x0 + size - 1 - x } else { x0 + x };
        src.get(sx, y0 + y)
    })
}

fn crop_rgb(src: &ImageRgb<f64>, x0: usize, y0: usize, size: usize, flip: bool) -> ImageRgb<f64> {
    ImageRgb::new(
        crop_plane(src.r(), x0, y0, size, flip),
        crop_plane(src.g(), x0, y0, size, flip),
        crop_plane(src.b(), x0, y0, size, flip),
    )
}

/// Cuts the same random `size`x`size` window out of both images and flips
/// both horizontally with probability 1/2.
pub fn random_crop_pair(
    pair: &SamplePair,
    size: usize,
    rng: &mut impl Rng,
) -> Result<SamplePair, CropError> {
    let (w, h) = (pair.width(), pair.height());
    if w < size || h < size || size == 0 {
        return Err(CropError::TooSmall {
            width: w,
            height: h,
            size,
        });
    }
    let x0 = rng.gen_range(0..=w - size);
    let y0 = rng.gen_range(0..=h - size);
    let flip = rng.gen_bool(0.5);
    Ok(SamplePair {
        rainy: crop_rgb(&pair.rainy, x0, y0, size, flip),
        clean: crop_rgb(&pair.clean, x0, y0, size, flip),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn checkered_pair(w: usize, h: usize) -> SamplePair {
        let rainy = ImageRgb::new(
            ImagePlane::from_fn(w, h, |x, y| ((x * 7 + y * 13) % 101) as f64 / 101.0),
            ImagePlane::from_fn(w, h, |x, y| ((x * 3 + y * 5) % 97) as f64 / 97.0),
            ImagePlane::from_fn(w, h, |x, y| ((x + y) % 89) as f64 / 89.0),
        );
        let clean = rainy.map(|v| (v * 0.5) + 0.1);
        SamplePair::new(rainy, clean)
    }

    #[test]
    fn exact_size_image_crops_to_itself() {
        let pair = checkered_pair(16, 16);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        // Only one window exists; flip may still mirror both images.
        let crop = random_crop_pair(&pair, 16, &mut rng).unwrap();
        assert_eq!(crop.width(), 16);
        let direct = crop.rainy.max_abs_diff(&pair.rainy) == 0.0;
        let mirrored = {
            let mut rng2 = ChaCha8Rng::seed_from_u64(1);
            let _ = rng2.gen_range(0..=0usize);
            let _ = rng2.gen_range(0..=0usize);
            rng2.gen_bool(0.5)
        };
        assert_eq!(direct, !mirrored);
    }

    #[test]
    fn same_seed_reproduces_the_same_crop() {
        let pair = checkered_pair(40, 32);
        let mut a = ChaCha8Rng::seed_from_u64(9);
        let mut b = ChaCha8Rng::seed_from_u64(9);
        let ca = random_crop_pair(&pair, 17, &mut a).unwrap();
        let cb = random_crop_pair(&pair, 17, &mut b).unwrap();
        assert_eq!(ca.rainy.max_abs_diff(&cb.rainy), 0.0);
        assert_eq!(ca.clean.max_abs_diff(&cb.clean), 0.0);
    }

    #[test]
    fn crop_commutes_with_the_pair_difference() {
        // rainy crop minus clean crop equals the crop of (rainy - clean):
        // both images must have received the same window and flip.
        let pair = checkered_pair(30, 30);
        let diff_full = pair.rainy.zip_map(&pair.clean, |a, b| a - b);
        for seed in 0..8 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let crop = random_crop_pair(&pair, 12, &mut rng).unwrap();
            let diff_crop = crop.rainy.zip_map(&crop.clean, |a, b| a - b);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let crop_of_diff = random_crop_pair(
                &SamplePair::new(diff_full.clone(), diff_full.clone()),
                12,
                &mut rng,
            )
            .unwrap();
            assert_eq!(
                diff_crop.max_abs_diff(&crop_of_diff.rainy),
                0.0,
                "seed {seed}"
            );
        }
    }

    #[test]
    fn both_flip_outcomes_occur() {
        let pair = checkered_pair(16, 16);
        let mut seen_plain = false;
        let mut seen_mirrored = false;
        for seed in 0..32 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let crop = random_crop_pair(&pair, 16, &mut rng).unwrap();
            if crop.rainy.max_abs_diff(&pair.rainy) == 0.0 {
                seen_plain = true;
            } else {
                // Mirror of the mirror restores the original.
                let mirrored = ImageRgb::new(
                    ImagePlane::from_fn(16, 16, |x, y| crop.rainy.r().get(15 - x, y)),
                    ImagePlane::from_fn(16, 16, |x, y| crop.rainy.g().get(15 - x, y)),
                    ImagePlane::from_fn(16, 16, |x, y| crop.rainy.b().get(15 - x, y)),
                );
                assert_eq!(mirrored.max_abs_diff(&pair.rainy), 0.0);
                seen_mirrored = true;
            }
        }
        assert!(seen_plain && seen_mirrored);
    }

    #[test]
    fn undersized_images_are_rejected() {
        let pair = checkered_pair(10, 20);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = random_crop_pair(&pair, 16, &mut rng).unwrap_err();
        assert!(err.to_string().contains("smaller than"), "{err}");
    }
}
