//! Base / high-frequency image splitting built on the filter.
//!
//! The high layer is the signed residual between the image and its filtered
//! base; rain streaks and noise concentrate there. The split is arranged so
//! that adding the two stored layers reproduces the input bit-for-bit at
//! every pixel whose residual is no larger in magnitude scale than the pixel
//! itself (the usual case; see `Decomposition`).

use crate::image::{to_luminance, ImagePlane, ImageRgb};

use super::{iwgif_filter, FilterError, FilterParams};

/// A base layer and its signed high-frequency complement.
///
/// `base + high` reproduces the decomposed image exactly, per sample, as
/// long as `|high|` does not exceed the magnitude scale (binade) of the
/// sample itself; over-bright smoothing of a near-black pixel can leave a
/// one-ulp-of-`high` discrepancy, which is the attainable limit for a
/// two-term split in fixed-width floats. The high layer is kept signed and
/// unclamped in memory; [`encode_high`] maps it into `[0, 1]` for file export.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub base: ImageRgb<f64>,
    pub high: ImageRgb<f64>,
}

/// Splits one plane against a guidance plane.
///
/// The raw filter output is nudged so the pair sums back to the input: the
/// residual is rounded once, the base is recomputed against that rounded
/// residual, and the residual is recomputed once more against the rounded
/// base. Each recomputation can only shrink the reconstruction error, and
/// the final error is below half an ulp of the (small) high value rather
/// than of the (large) base value.
fn split_plane(
    i: &ImagePlane<f64>,
    g: &ImagePlane<f64>,
    params: &FilterParams,
) -> Result<(ImagePlane<f64>, ImagePlane<f64>), FilterError> {
    let filtered = iwgif_filter(i, g, params)?;
    let mut base = ImagePlane::zeros(i.width(), i.height());
    let mut high = ImagePlane::zeros(i.width(), i.height());
    for y in 0..i.height() {
        for x in 0..i.width() {
            let iv = i.get(x, y);
            let h0 = iv - filtered.get(x, y);
            let b = iv - h0;
            base.set(x, y, b);
            high.set(x, y, iv - b);
        }
    }
    Ok((base, high))
}

/// Splits each channel with that channel as its own guidance.
pub fn decompose(img: &ImageRgb<f64>, params: &FilterParams) -> Result<Decomposition, FilterError> {
    let mut bases = Vec::with_capacity(3);
    let mut highs = Vec::with_capacity(3);
    for c in 0..3 {
        let (b, h) = split_plane(img.channel(c), img.channel(c), params)?;
        bases.push(b);
        highs.push(h);
    }
    Ok(Decomposition {
        base: ImageRgb::new(bases.remove(0), bases.remove(0), bases.remove(0)),
        high: ImageRgb::new(highs.remove(0), highs.remove(0), highs.remove(0)),
    })
}

/// Splits each channel against the shared luminance plane.
pub fn decompose_luma_guided(
    img: &ImageRgb<f64>,
    params: &FilterParams,
) -> Result<Decomposition, FilterError> {
    let luma = to_luminance(img);
    let mut bases = Vec::with_capacity(3);
    let mut highs = Vec::with_capacity(3);
    for c in 0..3 {
        let (b, h) = split_plane(img.channel(c), &luma, params)?;
        bases.push(b);
        highs.push(h);
    }
    Ok(Decomposition {
        base: ImageRgb::new(bases.remove(0), bases.remove(0), bases.remove(0)),
        high: ImageRgb::new(highs.remove(0), highs.remove(0), highs.remove(0)),
    })
}

/// Maps a signed high-frequency plane into `[0, 1]` for image export:
/// `0.5 + v`, clamped.
pub fn encode_high(high: &ImageRgb<f64>) -> ImageRgb<f64> {
    high.map(|v| (0.5 + v).clamp(0.0, 1.0))
}

/// Inverse of [`encode_high`] up to the clamp: recovers `v - 0.5`.
pub fn decode_high(encoded: &ImageRgb<f64>) -> ImageRgb<f64> {
    encoded.map(|v| v - 0.5)
}
