//! Channel and spatial attention gates.
//!
//! Both follow squeeze-gate-scale: reduce the activation to a small
//! descriptor, map it through a tiny conv stack, squash to (0, 1) with a
//! sigmoid, and multiply the input by the gate. Channel attention gates
//! each channel by a scalar; spatial attention gates each pixel by a map
//! shared across channels.

use crate::real::Real;

use super::conv::{relu, relu_backward, sigmoid, sigmoid_backward, Conv2d};
use super::tensor::Tensor;

/// Per-channel gate driven by global average pooling.
#[derive(Clone, Debug)]
pub struct ChannelAttention<S> {
    pub fc1: Conv2d<S>,
    pub fc2: Conv2d<S>,
}

/// Intermediate activations needed by [`ChannelAttention::backward`].
pub struct CaCache<S> {
    pooled: Tensor<S>,
    z1: Tensor<S>,
    r1: Tensor<S>,
    gate: Tensor<S>,
}

impl<S: Real> ChannelAttention<S> {
    /// `channels` must be a positive multiple of `reduction`.
    pub fn new(channels: usize, reduction: usize) -> Self {
        assert!(reduction >= 1, "reduction must be at least 1");
        assert!(
            channels >= reduction && channels.is_multiple_of(reduction),
            "channels {channels} not divisible by reduction {reduction}"
        );
        ChannelAttention {
            fc1: Conv2d::new(channels, channels / reduction, 1),
            fc2: Conv2d::new(channels / reduction, channels, 1),
        }
    }

    pub fn forward(&self, x: &Tensor<S>) -> (Tensor<S>, CaCache<S>) {
        let (n, c, h, w) = x.dims();
        let hw = S::from_count(h * w);
        let mut pooled = Tensor::zeros(n, c, 1, 1);
        for b in 0..n {
            for ch in 0..c {
                let sum: S = x.plane(b, ch).iter().copied().sum();
                pooled.set(b, ch, 0, 0, sum / hw);
            }
        }
        let z1 = self.fc1.forward(&pooled);
        let r1 = relu(&z1);
        let z2 = self.fc2.forward(&r1);
        let gate = sigmoid(&z2);
        let mut out = Tensor::zeros(n, c, h, w);
        for b in 0..n {
            for ch in 0..c {
                let g = gate.get(b, ch, 0, 0);
                let src = x.plane(b, ch);
                for (o, &v) in out.plane_mut(b, ch).iter_mut().zip(src) {
                    *o = v * g;
                }
            }
        }
        let cache = CaCache {
            pooled,
            z1,
            r1,
            gate,
        };
        (out, cache)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Tensor<S>, cache: &CaCache<S>, gout: &Tensor<S>) -> Tensor<S> {
        let (n, c, h, w) = x.dims();
        let hw = S::from_count(h * w);
        // Gate gradient: the gate multiplies every pixel of its channel.
        let mut dgate = Tensor::zeros(n, c, 1, 1);
        let mut dx = Tensor::zeros(n, c, h, w);
        for b in 0..n {
            for ch in 0..c {
                let g = cache.gate.get(b, ch, 0, 0);
                let xp = x.plane(b, ch);
                let gp = gout.plane(b, ch);
                let mut dot = S::zero();
                for (&xv, &gv) in xp.iter().zip(gp) {
                    dot += xv * gv;
                }
                dgate.set(b, ch, 0, 0, dot);
                for (o, &gv) in dx.plane_mut(b, ch).iter_mut().zip(gp) {
                    *o = gv * g;
                }
            }
        }
        let dz2 = sigmoid_backward(&cache.gate, &dgate);
        let dr1 = self.fc2.backward(&cache.r1, &dz2);
        let dz1 = relu_backward(&cache.z1, &dr1);
        let dpooled = self.fc1.backward(&cache.pooled, &dz1);
        // The pooled mean spreads its gradient uniformly over the plane.
        for b in 0..n {
            for ch in 0..c {
                let spread = dpooled.get(b, ch, 0, 0) / hw;
                for o in dx.plane_mut(b, ch) {
                    *o += spread;
                }
            }
        }
        dx
    }

    pub fn zero_grad(&mut self) {
        self.fc1.zero_grad();
        self.fc2.zero_grad();
    }
}

/// Per-pixel gate driven by cross-channel mean and max maps.
#[derive(Clone, Debug)]
pub struct SpatialAttention<S> {
    pub conv: Conv2d<S>,
}

/// Intermediate activations needed by [`SpatialAttention::backward`].
pub struct SaCache<S> {
    maps: Tensor<S>,
    gate: Tensor<S>,
    /// Channel holding the maximum at each (b, y, x); ties break toward
    /// the lowest channel index so the backward pass is deterministic.
    argmax: Vec<u32>,
}

impl<S: Real> SpatialAttention<S> {
    pub fn new(kernel: usize) -> Self {
        SpatialAttention {
            conv: Conv2d::new(2, 1, kernel),
        }
    }

    pub fn forward(&self, x: &Tensor<S>) -> (Tensor<S>, SaCache<S>) {
        let (n, c, h, w) = x.dims();
        assert!(c >= 1);
        let cs = S::from_count(c);
        let mut maps = Tensor::zeros(n, 2, h, w);
        let mut argmax = vec![0u32; n * h * w];
        for b in 0..n {
            // Mean map: accumulate channel planes in index order.
            for ch in 0..c {
                let src = x.plane(b, ch);
                for (o, &v) in maps.plane_mut(b, 0).iter_mut().zip(src) {
                    *o += v;
                }
            }
            for o in maps.plane_mut(b, 0) {
                *o /= cs;
            }
            // Max map with first-channel tie break.
            maps.plane_mut(b, 1).copy_from_slice(x.plane(b, 0));
            for ch in 1..c {
                let src = x.plane(b, ch);
                let base = b * h * w;
                let dst = maps.plane_mut(b, 1);
                for (i, (o, &v)) in dst.iter_mut().zip(src).enumerate() {
                    if v > *o {
                        *o = v;
                        argmax[base + i] = ch as u32;
                    }
                }
            }
        }
        let z = self.conv.forward(&maps);
        let gate = sigmoid(&z);
        let mut out = Tensor::zeros(n, c, h, w);
        for b in 0..n {
            let gp = gate.plane(b, 0);
            for ch in 0..c {
                let src = x.plane(b, ch);
                for ((o, &v), &g) in out.plane_mut(b, ch).iter_mut().zip(src).zip(gp) {
                    *o = v * g;
                }
            }
        }
        let cache = SaCache { maps, gate, argmax };
        (out, cache)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Tensor<S>, cache: &SaCache<S>, gout: &Tensor<S>) -> Tensor<S> {
        let (n, c, h, w) = x.dims();
        let cs = S::from_count(c);
        let mut dgate = Tensor::zeros(n, 1, h, w);
        let mut dx = Tensor::zeros(n, c, h, w);
        for b in 0..n {
            for ch in 0..c {
                let xp = x.plane(b, ch);
                let gp = gout.plane(b, ch);
                let dg = dgate.plane_mut(b, 0);
                for ((o, &xv), &gv) in dg.iter_mut().zip(xp).zip(gp) {
                    *o += xv * gv;
                }
            }
            let gatep = cache.gate.plane(b, 0);
            for ch in 0..c {
                let gp = gout.plane(b, ch);
                let dst = dx.plane_mut(b, ch);
                for ((o, &gv), &g) in dst.iter_mut().zip(gp).zip(gatep) {
                    *o = gv * g;
                }
            }
        }
        let dz = sigmoid_backward(&cache.gate, &dgate);
        let dmaps = self.conv.backward(&cache.maps, &dz);
        for b in 0..n {
            // Mean map spreads evenly; max map routes to the recorded
            // channel only.
            for ch in 0..c {
                let mp = dmaps.plane(b, 0);
                let dst = dx.plane_mut(b, ch);
                for (o, &m) in dst.iter_mut().zip(mp) {
                    *o += m / cs;
                }
            }
            let base = b * h * w;
            for i in 0..h * w {
                let ch = cache.argmax[base + i] as usize;
                let m = dmaps.plane(b, 1)[i];
                dx.plane_mut(b, ch)[i] += m;
            }
        }
        dx
    }

    pub fn zero_grad(&mut self) {
        self.conv.zero_grad();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{max_fd_error, sample_coords, FD_STEP, FD_TOLERANCE};
    use crate::nn::testutil::{fill_param, hash_tensor};

    #[test]
    fn zero_convs_gate_at_exactly_half() {
        let ca = ChannelAttention::<f64>::new(4, 2);
        let x = hash_tensor::<f64>(1, 4, 5, 5, 11);
        let (out, cache) = ca.forward(&x);
        for b in 0..1 {
            for ch in 0..4 {
                assert_eq!(cache.gate.get(b, ch, 0, 0), 0.5);
            }
        }
        for (o, &v) in out.data.iter().zip(&x.data) {
            assert_eq!(*o, 0.5 * v);
        }

        let sa = SpatialAttention::<f64>::new(3);
        let (out, cache) = sa.forward(&x);
        assert!(cache.gate.data.iter().all(|&g| g == 0.5));
        for (o, &v) in out.data.iter().zip(&x.data) {
            assert_eq!(*o, 0.5 * v);
        }
    }

    #[test]
    fn channel_gate_stays_inside_unit_interval() {
        let mut ca = ChannelAttention::<f64>::new(4, 2);
        fill_param(&mut ca.fc1.weight, 21, 2.0);
        fill_param(&mut ca.fc1.bias, 22, 1.0);
        fill_param(&mut ca.fc2.weight, 23, 2.0);
        fill_param(&mut ca.fc2.bias, 24, 1.0);
        let x = hash_tensor::<f64>(2, 4, 6, 6, 25);
        let (_, cache) = ca.forward(&x);
        assert!(cache.gate.data.iter().all(|&g| g > 0.0 && g < 1.0));
    }

    #[test]
    fn max_map_takes_first_channel_on_ties() {
        // Two channels with identical planes: argmax must stay at 0.
        let plane = hash_tensor::<f64>(1, 1, 4, 4, 31);
        let mut x = Tensor::zeros(1, 2, 4, 4);
        x.plane_mut(0, 0).copy_from_slice(plane.plane(0, 0));
        x.plane_mut(0, 1).copy_from_slice(plane.plane(0, 0));
        let sa = SpatialAttention::<f64>::new(3);
        let (_, cache) = sa.forward(&x);
        assert!(cache.argmax.iter().all(|&a| a == 0));
        for (m, &v) in cache.maps.plane(0, 1).iter().zip(plane.plane(0, 0)) {
            assert_eq!(*m, v);
        }
    }

    fn ca_objective(ca: &ChannelAttention<f64>, x: &Tensor<f64>, d: &Tensor<f64>) -> f64 {
        let (out, _) = ca.forward(x);
        out.data.iter().zip(&d.data).map(|(&o, &dv)| o * dv).sum()
    }

    #[test]
    fn channel_attention_gradients_match_finite_differences() {
        let mut ca = ChannelAttention::<f64>::new(4, 2);
        fill_param(&mut ca.fc1.weight, 41, 1.5);
        fill_param(&mut ca.fc1.bias, 42, 0.5);
        fill_param(&mut ca.fc2.weight, 43, 1.5);
        fill_param(&mut ca.fc2.bias, 44, 0.5);
        let mut x = hash_tensor::<f64>(2, 4, 5, 5, 45);
        let d = hash_tensor::<f64>(2, 4, 5, 5, 46);

        ca.zero_grad();
        let (_, cache) = ca.forward(&x);
        let dx = ca.backward(&x, &cache, &d);
        let g_fc1_w = ca.fc1.weight.grad.clone();
        let g_fc1_b = ca.fc1.bias.grad.clone();
        let g_fc2_w = ca.fc2.weight.grad.clone();
        let g_fc2_b = ca.fc2.bias.grad.clone();

        let coords = sample_coords(x.len(), 24, 47);
        let err = max_fd_error(
            &coords,
            FD_STEP,
            |i, delta| {
                let orig = x.data[i];
                x.data[i] = orig + delta;
                let l = ca_objective(&ca, &x, &d);
                x.data[i] = orig;
                l
            },
            |i| dx.data[i],
        );
        assert!(err <= FD_TOLERANCE, "input gradient err {err}");

        for (which, analytic) in [(0, &g_fc1_w), (1, &g_fc1_b), (2, &g_fc2_w), (3, &g_fc2_b)] {
            let len = analytic.len();
            let coords = sample_coords(len, 16, 48 + which);
            let err = max_fd_error(
                &coords,
                FD_STEP,
                |i, delta| {
                    let vals = match which {
                        0 => &mut ca.fc1.weight.values,
                        1 => &mut ca.fc1.bias.values,
                        2 => &mut ca.fc2.weight.values,
                        _ => &mut ca.fc2.bias.values,
                    };
                    let orig = vals[i];
                    vals[i] = orig + delta;
                    let l = ca_objective(&ca, &x, &d);
                    let vals = match which {
                        0 => &mut ca.fc1.weight.values,
                        1 => &mut ca.fc1.bias.values,
                        2 => &mut ca.fc2.weight.values,
                        _ => &mut ca.fc2.bias.values,
                    };
                    vals[i] = orig;
                    l
                },
                |i| analytic[i],
            );
            assert!(err <= FD_TOLERANCE, "param set {which} err {err}");
        }
    }

    #[test]
    fn spatial_attention_gradients_match_finite_differences() {
        let mut sa = SpatialAttention::<f64>::new(3);
        fill_param(&mut sa.conv.weight, 51, 1.5);
        fill_param(&mut sa.conv.bias, 52, 0.5);
        let mut x = hash_tensor::<f64>(2, 3, 5, 5, 53);
        let d = hash_tensor::<f64>(2, 3, 5, 5, 54);

        sa.zero_grad();
        let (_, cache) = sa.forward(&x);
        let dx = sa.backward(&x, &cache, &d);
        let g_w = sa.conv.weight.grad.clone();
        let g_b = sa.conv.bias.grad.clone();

        let objective = |sa: &SpatialAttention<f64>, x: &Tensor<f64>| -> f64 {
            let (out, _) = sa.forward(x);
            out.data.iter().zip(&d.data).map(|(&o, &dv)| o * dv).sum()
        };

        let coords = sample_coords(x.len(), 30, 55);
        let err = max_fd_error(
            &coords,
            FD_STEP,
            |i, delta| {
                let orig = x.data[i];
                x.data[i] = orig + delta;
                let l = objective(&sa, &x);
                x.data[i] = orig;
                l
            },
            |i| dx.data[i],
        );
        assert!(err <= FD_TOLERANCE, "input gradient err {err}");

        let coords = sample_coords(g_w.len(), 18, 56);
        let err = max_fd_error(
            &coords,
            FD_STEP,
            |i, delta| {
                let orig = sa.conv.weight.values[i];
                sa.conv.weight.values[i] = orig + delta;
                let l = objective(&sa, &x);
                sa.conv.weight.values[i] = orig;
                l
            },
            |i| g_w[i],
        );
        assert!(err <= FD_TOLERANCE, "weight gradient err {err}");

        let err = max_fd_error(
            &[0],
            FD_STEP,
            |i, delta| {
                let orig = sa.conv.bias.values[i];
                sa.conv.bias.values[i] = orig + delta;
                let l = objective(&sa, &x);
                sa.conv.bias.values[i] = orig;
                l
            },
            |i| g_b[i],
        );
        assert!(err <= FD_TOLERANCE, "bias gradient err {err}");
    }
}
