//! 2-D convolution with same-size zero padding, stride 1, and exact
//! gradients for input, weights and bias.
//!
//! The inner loops run along image rows so the hot path is a scalar-times-
//! slice accumulation the compiler can vectorize without reordering any
//! floating-point reduction: results are bit-identical across runs.

use crate::real::Real;

use super::param::Param;
use super::tensor::Tensor;

#[derive(Clone, Debug)]
pub struct Conv2d<S> {
    pub in_ch: usize,
    pub out_ch: usize,
    pub k: usize,
    pub weight: Param<S>,
    pub bias: Param<S>,
}

impl<S: Real> Conv2d<S> {
    /// Zero-initialized convolution; `k` must be odd so padding is
    /// symmetric.
    pub fn new(in_ch: usize, out_ch: usize, k: usize) -> Self {
        assert!(k % 2 == 1, "conv kernel must be odd, got {k}");
        assert!(in_ch > 0 && out_ch > 0);
        Conv2d {
            in_ch,
            out_ch,
            k,
            weight: Param::zeros(&[out_ch, in_ch, k, k]),
            bias: Param::zeros(&[out_ch]),
        }
    }

    #[inline]
    fn widx(&self, oc: usize, ic: usize, ky: usize, kx: usize) -> usize {
        ((oc * self.in_ch + ic) * self.k + ky) * self.k + kx
    }

    /// Output column range `[x0, x1)` whose input column `x + dx` stays in
    /// bounds, with `dx = kx - pad`.
    #[inline]
    fn col_span(w: usize, pad: usize, kx: usize) -> (usize, usize) {
        let x0 = pad.saturating_sub(kx);
        let x1 = (w + pad).saturating_sub(kx).min(w);
        (x0, x1)
    }

    pub fn forward(&self, x: &Tensor<S>) -> Tensor<S> {
        assert_eq!(x.c(), self.in_ch, "conv input channel mismatch");
        let (n, _, h, w) = x.dims();
        let pad = self.k / 2;
        let mut out = Tensor::zeros(n, self.out_ch, h, w);
        for b in 0..n {
            for oc in 0..self.out_ch {
                let bval = self.bias.values[oc];
                out.plane_mut(b, oc).fill(bval);
                for ic in 0..self.in_ch {
                    for ky in 0..self.k {
                        // Output rows whose sampled input row is in bounds.
                        let y0 = pad.saturating_sub(ky);
                        let y1 = (h + pad).saturating_sub(ky).min(h);
                        for kx in 0..self.k {
                            let wgt = self.weight.values[self.widx(oc, ic, ky, kx)];
                            if wgt == S::zero() {
                                continue;
                            }
                            let (x0, x1) = Self::col_span(w, pad, kx);
                            if x0 >= x1 {
                                continue;
                            }
                            for oy in y0..y1 {
                                let iy = oy + ky - pad;
                                let src = &x.row(b, ic, iy)[x0 + kx - pad..x1 + kx - pad];
                                let dst = &mut out.row_mut(b, oc, oy)[x0..x1];
                                for (o, &i) in dst.iter_mut().zip(src) {
                                    *o += wgt * i;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Accumulates weight and bias gradients for the pass that produced
    /// `gout` from `x`, and returns the gradient with respect to `x`.
    pub fn backward(&mut self, x: &Tensor<S>, gout: &Tensor<S>) -> Tensor<S> {
        let (n, _, h, w) = x.dims();
        assert_eq!(gout.dims(), (n, self.out_ch, h, w), "conv grad dims");
        let pad = self.k / 2;
        let mut dx = Tensor::zeros(n, self.in_ch, h, w);
        for b in 0..n {
            for oc in 0..self.out_ch {
                let mut bsum = S::zero();
                for v in gout.plane(b, oc) {
                    bsum += *v;
                }
                self.bias.grad[oc] += bsum;
                for ic in 0..self.in_ch {
                    for ky in 0..self.k {
                        let y0 = pad.saturating_sub(ky);
                        let y1 = (h + pad).saturating_sub(ky).min(h);
                        for kx in 0..self.k {
                            let (x0, x1) = Self::col_span(w, pad, kx);
                            if x0 >= x1 || y0 >= y1 {
                                continue;
                            }
                            let wi = self.widx(oc, ic, ky, kx);
                            let wgt = self.weight.values[wi];
                            let mut wsum = S::zero();
                            for oy in y0..y1 {
                                let iy = oy + ky - pad;
                                let g = &gout.row(b, oc, oy)[x0..x1];
                                let src = &x.row(b, ic, iy)[x0 + kx - pad..x1 + kx - pad];
                                for (&gv, &iv) in g.iter().zip(src) {
                                    wsum += gv * iv;
                                }
                                let dst = &mut dx.row_mut(b, ic, iy)[x0 + kx - pad..x1 + kx - pad];
                                if wgt != S::zero() {
                                    for (d, &gv) in dst.iter_mut().zip(g) {
                                        *d += wgt * gv;
                                    }
                                }
                            }
                            self.weight.grad[wi] += wsum;
                        }
                    }
                }
            }
        }
        dx
    }

    pub fn zero_grad(&mut self) {
        self.weight.zero_grad();
        self.bias.zero_grad();
    }
}

/// Elementwise max(0, x).
pub fn relu<S: Real>(x: &Tensor<S>) -> Tensor<S> {
    x.map(|v| if v > S::zero() { v } else { S::zero() })
}

/// Routes `gout` through where the forward input was positive.
pub fn relu_backward<S: Real>(x: &Tensor<S>, gout: &Tensor<S>) -> Tensor<S> {
    x.zip_map(gout, |xv, g| if xv > S::zero() { g } else { S::zero() })
}

/// Elementwise logistic 1/(1+exp(-x)).
pub fn sigmoid<S: Real>(x: &Tensor<S>) -> Tensor<S> {
    x.map(|v| S::one() / (S::one() + (-v).exp()))
}

/// Sigmoid gradient written in terms of the forward output `s`.
pub fn sigmoid_backward<S: Real>(s: &Tensor<S>, gout: &Tensor<S>) -> Tensor<S> {
    s.zip_map(gout, |sv, g| g * sv * (S::one() - sv))
}
