//! Summed-area table with compensated entries.
//!
//! `entry(i, j)` holds the sum of the source plane over the first `i` rows and
//! first `j` columns, so the sum over any axis-aligned window comes from four
//! corner lookups regardless of window size. Entries keep a rounding
//! remainder alongside the main word (see [`super::compensated`]), which makes
//! recovered window sums correctly rounded even on megapixel planes where a
//! plain `f64` table has already lost the low bits.

use super::compensated::{two_prod, Dd};
use crate::image::ImagePlane;

/// Prefix-sum grid of `(height + 1) x (width + 1)` double-precision entries;
/// row 0 and column 0 are zero.
pub struct IntegralTable {
    width: usize,
    height: usize,
    entries: Vec<Dd>,
}

impl IntegralTable {
    /// Builds the table in one pass over the plane.
    pub fn new(plane: &ImagePlane<f64>) -> Self {
        let (w, h) = (plane.width(), plane.height());
        let stride = w + 1;
        let mut entries = vec![Dd::ZERO; stride * (h + 1)];
        for y in 0..h {
            let src = plane.row(y);
            let (above, cur) = entries.split_at_mut((y + 1) * stride);
            let above = &above[y * stride..];
            let cur = &mut cur[..stride];
            let mut run = Dd::ZERO;
            for x in 0..w {
                run = run.add_f64(src[x]);
                cur[x + 1] = above[x + 1].add(run);
            }
        }
        Self {
            width: w,
            height: h,
            entries,
        }
    }

    /// Builds the table of the elementwise product `a * b` without rounding
    /// the products first: each term enters the sum exactly, so the ratio of
    /// two such tables' window sums reproduces a shared scalar factor
    /// bit-for-bit.
    pub fn of_products(a: &ImagePlane<f64>, b: &ImagePlane<f64>) -> Self {
        assert!(a.same_dims(b), "product table: dimensions differ");
        let (w, h) = (a.width(), a.height());
        let stride = w + 1;
        let mut entries = vec![Dd::ZERO; stride * (h + 1)];
        for y in 0..h {
            let ra = a.row(y);
            let rb = b.row(y);
            let (above, cur) = entries.split_at_mut((y + 1) * stride);
            let above = &above[y * stride..];
            let cur = &mut cur[..stride];
            let mut run = Dd::ZERO;
            for x in 0..w {
                run = run.add(two_prod(ra[x], rb[x]));
                cur[x + 1] = above[x + 1].add(run);
            }
        }
        Self {
            width: w,
            height: h,
            entries,
        }
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    /// Sum of the source plane over rows `< i` and columns `< j`.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.entries[i * (self.width + 1) + j].value()
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> Dd {
        self.entries[i * (self.width + 1) + j]
    }

    /// Sum over the inclusive pixel window `[x0, x1] x [y0, y1]`.
    #[inline]
    pub(crate) fn window_sum_dd(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> Dd {
        debug_assert!(x0 <= x1 && x1 < self.width && y0 <= y1 && y1 < self.height);
        let a = self.at(y1 + 1, x1 + 1).sub(self.at(y0, x1 + 1));
        let b = self.at(y1 + 1, x0).sub(self.at(y0, x0));
        a.sub(b)
    }

    /// Sum over the inclusive pixel window `[x0, x1] x [y0, y1]`.
    #[inline]
    pub fn window_sum(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        self.window_sum_dd(x0, y0, x1, y1).value()
    }

    /// Mean over the inclusive pixel window `[x0, x1] x [y0, y1]`.
    #[inline]
    pub fn window_mean(&self, x0: usize, y0: usize, x1: usize, y1: usize) -> f64 {
        let count = (x1 - x0 + 1) * (y1 - y0 + 1);
        self.window_sum_dd(x0, y0, x1, y1).div_f64(count as f64)
    }
}
