//! Windowed box statistics and luminance conversion.

use super::integral::IntegralTable;
use crate::image::{ImagePlane, ImageRgb};
use crate::real::Real;

/// Per-pixel window statistics of a filtering input `I` against a guidance
/// plane `G` at a fixed radius. Windows are clipped to the image bounds and
/// normalized by the true pixel count.
#[derive(Clone, Debug)]
pub struct LocalStats {
    pub mu_g: ImagePlane<f64>,
    pub mu_i: ImagePlane<f64>,
    pub var_g: ImagePlane<f64>,
    pub var_i: ImagePlane<f64>,
    pub cov_ig: ImagePlane<f64>,
}

#[inline]
pub(crate) fn clip_window(
    x: usize,
    y: usize,
    radius: usize,
    width: usize,
    height: usize,
) -> (usize, usize, usize, usize) {
    let x0 = x.saturating_sub(radius);
    let y0 = y.saturating_sub(radius);
    let x1 = (x + radius).min(width - 1);
    let y1 = (y + radius).min(height - 1);
    (x0, y0, x1, y1)
}

/// Mean over the clipped window of the given radius at every pixel. Cost is
/// independent of the radius. Panics if `radius < 1`.
pub fn box_mean(plane: &ImagePlane<f64>, radius: usize) -> ImagePlane<f64> {
    assert!(radius >= 1, "box_mean: radius must be >= 1");
    let table = IntegralTable::new(plane);
    mean_from_table(&table, radius, plane.width(), plane.height())
}

fn mean_from_table(
    table: &IntegralTable,
    radius: usize,
    width: usize,
    height: usize,
) -> ImagePlane<f64> {
    ImagePlane::from_fn(width, height, |x, y| {
        let (x0, y0, x1, y1) = clip_window(x, y, radius, width, height);
        table.window_mean(x0, y0, x1, y1)
    })
}

/// Window means, variances and the I-G covariance at the given radius.
///
/// `var_g = mean(G*G) - mu_g^2` (clamped at 0 against cancellation), likewise
/// `var_i`; `cov_ig = mean(G*I) - mu_g * mu_i`. With `G = I` the covariance
/// and variance come out bitwise identical because the product planes are
/// built by the same expression. Panics if dimensions differ or `radius < 1`.
pub fn local_stats(i: &ImagePlane<f64>, g: &ImagePlane<f64>, radius: usize) -> LocalStats {
    assert!(i.same_dims(g), "local_stats: I and G dimensions differ");
    assert!(radius >= 1, "local_stats: radius must be >= 1");
    let (w, h) = (g.width(), g.height());

    let mu_g = box_mean(g, radius);
    let mu_i = box_mean(i, radius);
    let gg = g.zip_map(g, |a, b| a * b);
    let gi = g.zip_map(i, |a, b| a * b);
    let ii = i.zip_map(i, |a, b| a * b);
    let mu_gg = box_mean(&gg, radius);
    let mu_gi = box_mean(&gi, radius);
    let mu_ii = box_mean(&ii, radius);

    let var_g = ImagePlane::from_fn(w, h, |x, y| {
        let m = mu_g.get(x, y);
        (mu_gg.get(x, y) - m * m).max(0.0)
    });
    let var_i = ImagePlane::from_fn(w, h, |x, y| {
        let m = mu_i.get(x, y);
        (mu_ii.get(x, y) - m * m).max(0.0)
    });
    let cov_ig = ImagePlane::from_fn(w, h, |x, y| {
        mu_gi.get(x, y) - mu_g.get(x, y) * mu_i.get(x, y)
    });

    LocalStats {
        mu_g,
        mu_i,
        var_g,
        var_i,
        cov_ig,
    }
}

/// Scalar luminance, `0.299 r + 0.587 g + 0.114 b`.
pub fn to_luminance<S: Real>(img: &ImageRgb<S>) -> ImagePlane<S> {
    let (wr, wg, wb) = (S::lit(0.299), S::lit(0.587), S::lit(0.114));
    ImagePlane::from_fn(img.width(), img.height(), |x, y| {
        wr * img.r().get(x, y) + wg * img.g().get(x, y) + wb * img.b().get(x, y)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hash_plane(w: usize, h: usize, seed: u64) -> ImagePlane<f64> {
        ImagePlane::from_fn(w, h, |x, y| {
            let mut v = seed
                .wrapping_mul(0x9e3779b97f4a7c15)
                .wrapping_add((y * w + x + 1) as u64);
            v ^= v >> 30;
            v = v.wrapping_mul(0xbf58476d1ce4e5b9);
            v ^= v >> 27;
            (v >> 11) as f64 / (1u64 << 53) as f64
        })
    }

    fn naive_box_mean(p: &ImagePlane<f64>, radius: usize) -> ImagePlane<f64> {
        ImagePlane::from_fn(p.width(), p.height(), |x, y| {
            let (x0, y0, x1, y1) = clip_window(x, y, radius, p.width(), p.height());
            let mut s = 0.0;
            for yy in y0..=y1 {
                for xx in x0..=x1 {
                    s += p.get(xx, yy);
                }
            }
            s / ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64
        })
    }

    #[test]
    fn box_mean_constant_plane_is_exact() {
        let p = ImagePlane::constant(17, 11, 0.8137318511487362);
        for radius in [1, 2, 5] {
            let m = box_mean(&p, radius);
            assert_eq!(m.max_abs_diff(&p), 0.0, "radius {radius}");
        }
    }

    #[test]
    fn box_mean_center_and_corner_of_1_to_9() {
        let p = ImagePlane::new(3, 3, (1..=9).map(f64::from).collect());
        let m = box_mean(&p, 1);
        assert_eq!(m.get(1, 1), 5.0);
        assert_eq!(m.get(0, 0), (1.0 + 2.0 + 4.0 + 5.0) / 4.0);
    }

    #[test]
    fn box_mean_matches_naive_on_random_planes() {
        for (w, h, seed) in [(8, 8, 1u64), (64, 64, 2), (33, 17, 3)] {
            let p = hash_plane(w, h, seed);
            for radius in [1, 2, 5] {
                let fast = box_mean(&p, radius);
                let slow = naive_box_mean(&p, radius);
                assert!(fast.max_abs_diff(&slow) <= 1e-10, "{w}x{h} radius {radius}");
            }
        }
    }

    #[test]
    #[should_panic(expected = "radius must be >= 1")]
    fn box_mean_rejects_zero_radius() {
        let _ = box_mean(&ImagePlane::constant(4, 4, 0.0), 0);
    }

    #[test]
    fn local_stats_on_constant_input() {
        let k = 0.3725;
        let p = ImagePlane::constant(9, 9, k);
        let s = local_stats(&p, &p, 2);
        assert_eq!(s.mu_g.max_abs_diff(&p), 0.0);
        assert_eq!(s.mu_i.max_abs_diff(&p), 0.0);
        assert!(s.var_g.data().iter().all(|&v| v == 0.0));
        assert!(s.cov_ig.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn self_guided_cov_equals_var_bitwise() {
        let p = hash_plane(16, 12, 9);
        let s = local_stats(&p, &p, 3);
        assert_eq!(s.var_g, s.cov_ig);
        assert_eq!(s.var_g, s.var_i);
    }

    #[test]
    fn local_stats_matches_two_pass_oracle() {
        let i = hash_plane(8, 8, 21);
        let g = hash_plane(8, 8, 22);
        let s = local_stats(&i, &g, 2);
        for y in 0..8 {
            for x in 0..8 {
                let (x0, y0, x1, y1) = clip_window(x, y, 2, 8, 8);
                let n = ((x1 - x0 + 1) * (y1 - y0 + 1)) as f64;
                let (mut sg, mut si) = (0.0, 0.0);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        sg += g.get(xx, yy);
                        si += i.get(xx, yy);
                    }
                }
                let (mg, mi) = (sg / n, si / n);
                let (mut vg, mut cig) = (0.0, 0.0);
                for yy in y0..=y1 {
                    for xx in x0..=x1 {
                        vg += (g.get(xx, yy) - mg) * (g.get(xx, yy) - mg);
                        cig += (g.get(xx, yy) - mg) * (i.get(xx, yy) - mi);
                    }
                }
                assert!((s.mu_g.get(x, y) - mg).abs() <= 1e-10);
                assert!((s.mu_i.get(x, y) - mi).abs() <= 1e-10);
                assert!((s.var_g.get(x, y) - vg / n).abs() <= 1e-10);
                assert!((s.cov_ig.get(x, y) - cig / n).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn luminance_values() {
        let img = ImageRgb::new(
            ImagePlane::<f64>::constant(2, 2, 0.5),
            ImagePlane::constant(2, 2, 0.25),
            ImagePlane::constant(2, 2, 0.75),
        );
        let l = to_luminance(&img);
        assert!((l.get(0, 0) - 0.38175).abs() < 1e-15);

        let gray = ImageRgb::<f64>::constant(2, 2, 0.6);
        let lg = to_luminance(&gray);
        assert!((lg.get(1, 1) - 0.6).abs() < 1e-15);

        let red = ImageRgb::new(
            ImagePlane::<f64>::constant(1, 1, 1.0),
            ImagePlane::constant(1, 1, 0.0),
            ImagePlane::constant(1, 1, 0.0),
        );
        assert_eq!(to_luminance(&red).get(0, 0), 0.299);
    }
}
