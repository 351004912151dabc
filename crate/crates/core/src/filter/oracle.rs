//! Reference filter used to validate the production path.
//!
//! Everything here is written the slow, obvious way: explicit window loops,
//! two-pass centered moments, a quadratic-cost weighting pass, and direct
//! residual sums for the aggregation weights. None of the production
//! shortcuts (prefix tables, the closed-form residual identity) appear, so
//! agreement between the two paths checks the algebra, not the code.

use crate::image::ImagePlane;

use super::{FilterError, FilterParams, OracleTooLarge};

/// Largest side length the reference filter accepts; its weighting pass is
/// quadratic in the pixel count.
pub const ORACLE_SIDE_LIMIT: usize = 128;

fn window(x: usize, y: usize, r: usize, w: usize, h: usize) -> (usize, usize, usize, usize) {
    (
        x.saturating_sub(r),
        y.saturating_sub(r),
        (x + r).min(w - 1),
        (y + r).min(h - 1),
    )
}

/// Two-pass mean and centered second moments of one window.
fn window_moments(
    i: &ImagePlane<f64>,
    g: &ImagePlane<f64>,
    bounds: (usize, usize, usize, usize),
) -> (f64, f64, f64, f64, f64) {
    let (x0, y0, x1, y1) = bounds;
    let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
    let mut sg = 0.0;
    let mut si = 0.0;
    for yy in y0..=y1 {
        for xx in x0..=x1 {
            sg += g.get(xx, yy);
            si += i.get(xx, yy);
        }
    }
    let (mu_g, mu_i) = (sg / n, si / n);
    let mut var_g = 0.0;
    let mut var_i = 0.0;
    let mut cov = 0.0;
    for yy in y0..=y1 {
        for xx in x0..=x1 {
            let dg = g.get(xx, yy) - mu_g;
            let di = i.get(xx, yy) - mu_i;
            var_g += dg * dg;
            var_i += di * di;
            cov += dg * di;
        }
    }
    (mu_g, mu_i, var_g / n, var_i / n, cov / n)
}

/// Filters `I` against `G` by evaluating every definition directly.
///
/// Matches the production filter's conventions (clipped windows with true
/// counts, the zero-slope fallback for windows with no signal) while sharing
/// none of its arithmetic. Refuses images beyond [`ORACLE_SIDE_LIMIT`] per
/// side.
pub fn naive_iwgif_oracle(
    i: &ImagePlane<f64>,
    g: &ImagePlane<f64>,
    params: &FilterParams,
) -> Result<ImagePlane<f64>, FilterError> {
    if !i.same_dims(g) {
        return Err(FilterError::DimensionMismatch(
            i.width(),
            i.height(),
            g.width(),
            g.height(),
        ));
    }
    params.validate()?;
    let (w, h) = (i.width(), i.height());
    if w > ORACLE_SIDE_LIMIT || h > ORACLE_SIDE_LIMIT {
        return Err(FilterError::OracleTooLarge(OracleTooLarge {
            width: w,
            height: h,
            limit: ORACLE_SIDE_LIMIT,
        }));
    }

    // Radius-1 guidance variance, then the full quadratic ratio sum.
    let var1 = ImagePlane::from_fn(w, h, |x, y| {
        let (_, _, v, _, _) = window_moments(g, g, window(x, y, 1, w, h));
        v
    });
    let m = (w * h) as f64;
    let gamma = ImagePlane::from_fn(w, h, |x, y| {
        let num = var1.get(x, y) + params.epsilon;
        let mut s = 0.0;
        for &vp in var1.data() {
            s += num / (vp + params.epsilon);
        }
        s / m
    });

    let mut a = ImagePlane::zeros(w, h);
    let mut b = ImagePlane::zeros(w, h);
    let mut weight = ImagePlane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let bounds = window(x, y, params.zeta, w, h);
            let (mu_g, mu_i, var_g, _var_i, cov) = window_moments(i, g, bounds);
            let gm = gamma.get(x, y);
            let denom = gm * var_g + params.lambda;
            let av = if params.lambda == 0.0 && gm * var_g == 0.0 {
                if cov == 0.0 {
                    0.0
                } else {
                    return Err(FilterError::DegenerateWindow { x, y });
                }
            } else {
                gm * cov / denom
            };
            let bv = mu_i - av * mu_g;
            a.set(x, y, av);
            b.set(x, y, bv);

            // Aggregation weight from the residuals themselves.
            let (x0, y0, x1, y1) = bounds;
            let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
            let mut e = 0.0;
            for yy in y0..=y1 {
                for xx in x0..=x1 {
                    let r = av * g.get(xx, yy) + bv - i.get(xx, yy);
                    e += r * r;
                }
            }
            weight.set(x, y, (-(e / n) / params.eta).exp() + 0.001);
        }
    }

    // Blend the coefficients of every window that covers each pixel. Window
    // membership is symmetric, so those centers form the same clipped window.
    Ok(ImagePlane::from_fn(w, h, |x, y| {
        let (x0, y0, x1, y1) = window(x, y, params.zeta, w, h);
        let mut wa = 0.0;
        let mut wb = 0.0;
        let mut ws = 0.0;
        for yy in y0..=y1 {
            for xx in x0..=x1 {
                let wv = weight.get(xx, yy);
                wa += wv * a.get(xx, yy);
                wb += wv * b.get(xx, yy);
                ws += wv;
            }
        }
        (wa / ws) * g.get(x, y) + wb / ws
    }))
}
