//! The filter pipeline: edge-aware weighting, per-window linear fits,
//! residual-energy aggregation weights, and the weighted blend of window
//! coefficients into the output.

use crate::image::{box_mean, clip_window, local_stats, ImagePlane, IntegralTable, LocalStats};

use super::{FilterError, FilterParams};

/// Per-window linear model `a * G + b`, indexed by window center.
#[derive(Clone, Debug)]
pub struct CoefficientField {
    pub a: ImagePlane<f64>,
    pub b: ImagePlane<f64>,
}

/// Edge-aware weighting of a guidance plane.
///
/// With `v` the radius-1 window variance of `G` and `M` the pixel count,
/// the weight is `gamma(q) = (1/M) * sum_p (v(q) + eps) / (v(p) + eps)`:
/// above 1 on edges, below 1 in flat areas. The sum over `p` is shared by
/// every output pixel, so one pass precomputes `S = sum_p 1/(v(p) + eps)`
/// and the plane costs O(M) total. Panics if `eps <= 0`.
pub fn edge_aware_weight(g: &ImagePlane<f64>, epsilon: f64) -> ImagePlane<f64> {
    assert!(epsilon > 0.0, "edge_aware_weight: epsilon must be > 0");
    let mu = box_mean(g, 1);
    let mu2 = box_mean(&g.zip_map(g, |a, b| a * b), 1);
    let var1 = ImagePlane::from_fn(g.width(), g.height(), |x, y| {
        let m = mu.get(x, y);
        (mu2.get(x, y) - m * m).max(0.0)
    });
    let mut recip_sum = 0.0;
    for &v in var1.data() {
        recip_sum += 1.0 / (v + epsilon);
    }
    let m = var1.len() as f64;
    var1.map(|v| (v + epsilon) * recip_sum / m)
}

/// Closed-form ridge solution of the per-window model: `a = gamma*cov /
/// (gamma*var_G + lambda)`, `b = mu_I - a*mu_G`.
///
/// With `lambda = 0` a zero-variance window is only solvable when the
/// covariance also vanishes (then `a = 0`, a constant fit); otherwise it is
/// reported as degenerate.
pub fn fit_linear_coefficients(
    stats: &LocalStats,
    gamma: &ImagePlane<f64>,
    lambda: f64,
) -> Result<CoefficientField, FilterError> {
    let (w, h) = (gamma.width(), gamma.height());
    let mut a = ImagePlane::zeros(w, h);
    let mut b = ImagePlane::zeros(w, h);
    for y in 0..h {
        for x in 0..w {
            let g = gamma.get(x, y);
            let var = stats.var_g.get(x, y);
            let cov = stats.cov_ig.get(x, y);
            let scaled_var = g * var;
            let av = if lambda == 0.0 && scaled_var == 0.0 {
                if cov == 0.0 {
                    0.0
                } else {
                    return Err(FilterError::DegenerateWindow { x, y });
                }
            } else {
                g * cov / (scaled_var + lambda)
            };
            a.set(x, y, av);
            b.set(x, y, stats.mu_i.get(x, y) - av * stats.mu_g.get(x, y));
        }
    }
    Ok(CoefficientField { a, b })
}

/// Mean squared fit residual of each window, recovered from the window
/// statistics instead of a second pass over the pixels:
/// `E = var_I - a^2 * (var_G + 2*lambda/gamma)`, clamped at 0. This equals
/// the direct windowed mean of `(a*G + b - I)^2` because `a` is the ridge
/// optimum of that window.
pub fn residual_energy(
    a: &ImagePlane<f64>,
    stats: &LocalStats,
    gamma: &ImagePlane<f64>,
    lambda: f64,
) -> ImagePlane<f64> {
    ImagePlane::from_fn(a.width(), a.height(), |x, y| {
        let av = a.get(x, y);
        let t = stats.var_g.get(x, y) + 2.0 * lambda / gamma.get(x, y);
        (stats.var_i.get(x, y) - av * av * t).max(0.0)
    })
}

/// Aggregation weight of each window: `W = exp(-E/eta) + 0.001`, in
/// `(0.001, 1.001]`. Low-residual windows dominate the blend.
pub fn aggregation_weight(energy: &ImagePlane<f64>, eta: f64) -> ImagePlane<f64> {
    assert!(eta > 0.0, "aggregation_weight: eta must be > 0");
    energy.map(|e| (-e / eta).exp() + 0.001)
}

/// Filters `I` against guidance `G`.
///
/// Every pixel's output is `a_bar * G(p) + b_bar`, where `a_bar` and `b_bar`
/// are the residual-weighted means of the window coefficients over all
/// windows containing `p`. The three windowed sums (`W*a`, `W*b`, `W`) run on
/// integral tables, so the cost is O(M) regardless of `zeta`.
pub fn iwgif_filter(
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

    let stats = local_stats(i, g, params.zeta);
    let gamma = edge_aware_weight(g, params.epsilon);
    let coeff = fit_linear_coefficients(&stats, &gamma, params.lambda)?;
    let energy = residual_energy(&coeff.a, &stats, &gamma, params.lambda);
    let weight = aggregation_weight(&energy, params.eta);

    let t_wa = IntegralTable::of_products(&weight, &coeff.a);
    let t_wb = IntegralTable::of_products(&weight, &coeff.b);
    let t_w = IntegralTable::new(&weight);

    Ok(ImagePlane::from_fn(w, h, |x, y| {
        let (x0, y0, x1, y1) = clip_window(x, y, params.zeta, w, h);
        let den = t_w.window_sum_dd(x0, y0, x1, y1);
        let a_bar = t_wa.window_sum_dd(x0, y0, x1, y1).div(den);
        let b_bar = t_wb.window_sum_dd(x0, y0, x1, y1).div(den);
        a_bar * g.get(x, y) + b_bar
    }))
}
