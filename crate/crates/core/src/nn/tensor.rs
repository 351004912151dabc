//! 4-D activation container: (batch, channels, height, width), row-major
//! with width fastest.

use crate::real::Real;

#[derive(Clone, Debug)]
pub struct Tensor<S> {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    pub data: Vec<S>,
}

impl<S: Real> Tensor<S> {
    pub fn zeros(n: usize, c: usize, h: usize, w: usize) -> Self {
        assert!(n * c * h * w > 0, "tensor dims must be positive");
        Tensor {
            n,
            c,
            h,
            w,
            data: vec![S::zero(); n * c * h * w],
        }
    }

    pub fn from_vec(n: usize, c: usize, h: usize, w: usize, data: Vec<S>) -> Self {
        assert_eq!(data.len(), n * c * h * w, "tensor data length mismatch");
        assert!(!data.is_empty(), "tensor dims must be positive");
        Tensor { n, c, h, w, data }
    }

    pub fn from_fn(
        n: usize,
        c: usize,
        h: usize,
        w: usize,
        mut f: impl FnMut(usize, usize, usize, usize) -> S,
    ) -> Self {
        let mut data = Vec::with_capacity(n * c * h * w);
        for b in 0..n {
            for ch in 0..c {
                for y in 0..h {
                    for x in 0..w {
                        data.push(f(b, ch, y, x));
                    }
                }
            }
        }
        Tensor::from_vec(n, c, h, w, data)
    }

    pub fn dims(&self) -> (usize, usize, usize, usize) {
        (self.n, self.c, self.h, self.w)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn same_dims(&self, other: &Tensor<S>) -> bool {
        self.dims() == other.dims()
    }

    #[inline]
    fn plane_offset(&self, b: usize, ch: usize) -> usize {
        (b * self.c + ch) * self.h * self.w
    }

    #[inline]
    pub fn row(&self, b: usize, ch: usize, y: usize) -> &[S] {
        let start = self.plane_offset(b, ch) + y * self.w;
        &self.data[start..start + self.w]
    }

    #[inline]
    pub fn row_mut(&mut self, b: usize, ch: usize, y: usize) -> &mut [S] {
        let start = self.plane_offset(b, ch) + y * self.w;
        &mut self.data[start..start + self.w]
    }

    /// One (batch, channel) plane as a flat slice.
    #[inline]
    pub fn plane(&self, b: usize, ch: usize) -> &[S] {
        let start = self.plane_offset(b, ch);
        &self.data[start..start + self.h * self.w]
    }

    #[inline]
    pub fn plane_mut(&mut self, b: usize, ch: usize) -> &mut [S] {
        let start = self.plane_offset(b, ch);
        let hw = self.h * self.w;
        &mut self.data[start..start + hw]
    }

    #[inline]
    pub fn get(&self, b: usize, ch: usize, y: usize, x: usize) -> S {
        self.data[self.plane_offset(b, ch) + y * self.w + x]
    }

    #[inline]
    pub fn set(&mut self, b: usize, ch: usize, y: usize, x: usize, v: S) {
        let idx = self.plane_offset(b, ch) + y * self.w + x;
        self.data[idx] = v;
    }

    pub fn map(&self, mut f: impl FnMut(S) -> S) -> Tensor<S> {
        Tensor {
            n: self.n,
            c: self.c,
            h: self.h,
            w: self.w,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Tensor<S>, mut f: impl FnMut(S, S) -> S) -> Tensor<S> {
        assert!(self.same_dims(other), "tensor dims differ");
        Tensor {
            n: self.n,
            c: self.c,
            h: self.h,
            w: self.w,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn cast<T: Real>(&self) -> Tensor<T> {
        Tensor {
            n: self.n,
            c: self.c,
            h: self.h,
            w: self.w,
            data: self
                .data
                .iter()
                .map(|&v| T::lit(v.to_f64_lossy()))
                .collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &Tensor<S>) -> S {
        assert!(self.same_dims(other), "tensor dims differ");
        self.data
            .iter()
            .zip(&other.data)
            .fold(S::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }
}
