//! Image quality scoring: peak signal-to-noise ratio and structural
//! similarity.
//!
//! Both scores are accumulated so that mirroring both inputs horizontally
//! reproduces the result bit-for-bit: every row is reduced in symmetric
//! pairs (outermost columns first), which commutes with the flip, and rows
//! are combined top to bottom, which the flip does not touch. Comparing an
//! image with itself likewise runs both operands through identical
//! arithmetic, so the similarity score is exactly 1.

use std::fmt;

use crate::image::{ImagePlane, ImageRgb};

#[derive(Debug)]
pub enum MetricsError {
    /// Left dims vs right dims.
    DimensionMismatch(usize, usize, usize, usize),
    /// Image too small for the similarity window.
    WindowExceedsImage {
        width: usize,
        height: usize,
        window: usize,
    },
    InvalidParams(String),
}

impl fmt::Display for MetricsError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricsError::DimensionMismatch(w0, h0, w1, h1) => {
                write!(f, "dimension mismatch: {w0}x{h0} vs {w1}x{h1}")
            }
            MetricsError::WindowExceedsImage {
                width,
                height,
                window,
            } => write!(
                f,
                "image {width}x{height} smaller than the {window}x{window} similarity window"
            ),
            MetricsError::InvalidParams(msg) => write!(f, "invalid metric params: {msg}"),
        }
    }
}

impl std::error::Error for MetricsError {}

/// Configuration of the structural-similarity score.
#[derive(Clone, Copy, Debug)]
pub struct SsimParams {
    /// Window radius in pixels; the window spans `2*radius + 1`.
    pub radius: usize,
    /// Gaussian weighting sigma.
    pub sigma: f64,
    /// Luminance stabilizer coefficient.
    pub k1: f64,
    /// Contrast stabilizer coefficient.
    pub k2: f64,
    /// Dynamic range of the samples (1.0 for `[0, 1]` images).
    pub peak: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            radius: 5,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            peak: 1.0,
        }
    }
}

impl SsimParams {
    pub fn validate(&self) -> Result<(), MetricsError> {
        if self.radius == 0 {
            return Err(MetricsError::InvalidParams("radius must be >= 1".into()));
        }
        for (name, v) in [
            ("sigma", self.sigma),
            ("k1", self.k1),
            ("k2", self.k2),
            ("peak", self.peak),
        ] {
            let ok = v.is_finite() && v > 0.0;
            if !ok {
                return Err(MetricsError::InvalidParams(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(())
    }
}

/// Sums `f(left) + f(right)` over one row in symmetric column pairs, then
/// the middle column of odd rows. The pair sums commute under a horizontal
/// flip, so the reduction is flip-invariant to the bit.
fn symmetric_row_sum(row: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let w = row.len();
    let mut acc = 0.0;
    for j in 0..w / 2 {
        acc += f(row[j]) + f(row[w - 1 - j]);
    }
    if w % 2 == 1 {
        acc += f(row[w / 2]);
    }
    acc
}

fn mean_squared_error(a: &ImageRgb<f64>, b: &ImageRgb<f64>) -> f64 {
    let (w, h) = (a.width(), a.height());
    let mut total = 0.0;
    for c in 0..3 {
        let (pa, pb) = (a.channel(c), b.channel(c));
        let mut channel_sum = 0.0;
        for y in 0..h {
            let (ra, rb) = (pa.row(y), pb.row(y));
            let mut acc = 0.0;
            for j in 0..w / 2 {
                let dl = ra[j] - rb[j];
                let k = w - 1 - j;
                let dr = ra[k] - rb[k];
                acc += dl * dl + dr * dr;
            }
            if w % 2 == 1 {
                let d = ra[w / 2] - rb[w / 2];
                acc += d * d;
            }
            channel_sum += acc;
        }
        total += channel_sum;
    }
    total / (3 * w * h) as f64
}

/// Peak signal-to-noise ratio in decibels: `10*log10(peak^2 / MSE)` with
/// the error averaged over all channels and pixels. Identical inputs have
/// zero error; that case returns `f64::INFINITY` as the score.
pub fn psnr(a: &ImageRgb<f64>, b: &ImageRgb<f64>, peak: f64) -> Result<f64, MetricsError> {
    if !a.same_dims(b) {
        return Err(MetricsError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    let peak_ok = peak.is_finite() && peak > 0.0;
    if !peak_ok {
        return Err(MetricsError::InvalidParams(format!(
            "peak must be finite and > 0, got {peak}"
        )));
    }
    let mse = mean_squared_error(a, b);
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * ((peak * peak) / mse).log10())
}

/// Normalized gaussian taps by distance from the window center: index `d`
/// holds the weight of the two samples `d` pixels away (index 0 the center),
/// scaled so center + 2*sum(rest) = 1.
fn gaussian_taps(radius: usize, sigma: f64) -> Vec<f64> {
    let mut taps: Vec<f64> = (0..=radius)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total = taps[0] + 2.0 * taps[1..].iter().sum::<f64>();
    for t in &mut taps {
        *t /= total;
    }
    taps
}

/// Gaussian-smooths the valid region (no padding): output shrinks by
/// `2*radius` per axis. Both passes reduce each window center-out in
/// symmetric pairs.
fn smooth_valid(plane: &ImagePlane<f64>, taps: &[f64]) -> ImagePlane<f64> {
    let r = taps.len() - 1;
    let (w, h) = (plane.width(), plane.height());
    // Horizontal pass: full height, valid columns only.
    let hw = w - 2 * r;
    let mut mid = ImagePlane::zeros(hw, h);
    for y in 0..h {
        let row = plane.row(y);
        for cx in r..w - r {
            let mut acc = taps[0] * row[cx];
            for (d, &t) in taps.iter().enumerate().skip(1) {
                acc += t * (row[cx - d] + row[cx + d]);
            }
            mid.set(cx - r, y, acc);
        }
    }
    // Vertical pass over the intermediate.
    let hh = h - 2 * r;
    ImagePlane::from_fn(hw, hh, |x, oy| {
        let cy = oy + r;
        let mut acc = taps[0] * mid.get(x, cy);
        for (d, &t) in taps.iter().enumerate().skip(1) {
            acc += t * (mid.get(x, cy - d) + mid.get(x, cy + d));
        }
        acc
    })
}

fn ssim_plane(a: &ImagePlane<f64>, b: &ImagePlane<f64>, params: &SsimParams) -> f64 {
    let taps = gaussian_taps(params.radius, params.sigma);
    let c1 = (params.k1 * params.peak) * (params.k1 * params.peak);
    let c2 = (params.k2 * params.peak) * (params.k2 * params.peak);

    let mu_a = smooth_valid(a, &taps);
    let mu_b = smooth_valid(b, &taps);
    let mu_aa = smooth_valid(&a.zip_map(a, |x, y| x * y), &taps);
    let mu_bb = smooth_valid(&b.zip_map(b, |x, y| x * y), &taps);
    let mu_ab = smooth_valid(&a.zip_map(b, |x, y| x * y), &taps);

    let map = ImagePlane::from_fn(mu_a.width(), mu_a.height(), |x, y| {
        let (ma, mb) = (mu_a.get(x, y), mu_b.get(x, y));
        let va = (mu_aa.get(x, y) - ma * ma).max(0.0);
        let vb = (mu_bb.get(x, y) - mb * mb).max(0.0);
        let cab = mu_ab.get(x, y) - ma * mb;
        let num = (2.0 * ma * mb + c1) * (2.0 * cab + c2);
        let den = (ma * ma + mb * mb + c1) * (va + vb + c2);
        num / den
    });

    let mut total = 0.0;
    for y in 0..map.height() {
        total += symmetric_row_sum(map.row(y), |v| v);
    }
    total / map.len() as f64
}

/// Mean structural similarity over gaussian-weighted local windows,
/// computed per channel on the valid region (windows fully inside the
/// image) and averaged across channels. Scores lie in [-1, 1]; identical
/// images score exactly 1.
pub fn ssim(
    a: &ImageRgb<f64>,
    b: &ImageRgb<f64>,
    params: &SsimParams,
) -> Result<f64, MetricsError> {
    if !a.same_dims(b) {
        return Err(MetricsError::DimensionMismatch(
            a.width(),
            a.height(),
            b.width(),
            b.height(),
        ));
    }
    params.validate()?;
    let window = 2 * params.radius + 1;
    if a.width() < window || a.height() < window {
        return Err(MetricsError::WindowExceedsImage {
            width: a.width(),
            height: a.height(),
            window,
        });
    }
    let mut total = 0.0;
    for c in 0..3 {
        total += ssim_plane(a.channel(c), b.channel(c), params);
    }
    Ok(total / 3.0)
}
