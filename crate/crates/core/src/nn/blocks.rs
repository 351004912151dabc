//! Composite blocks: the dual-attention block, the recursive residual
//! group that stacks them, and the small conv branch that injects the
//! high-frequency layer into the trunk.

use crate::real::Real;

use super::attention::{CaCache, ChannelAttention, SaCache, SpatialAttention};
use super::conv::{relu, relu_backward, Conv2d};
use super::tensor::Tensor;

/// Stacks `a`'s channels before `b`'s; batch and spatial dims must match.
fn concat_channels<S: Real>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    let (n, ca, h, w) = a.dims();
    let (nb, cb, hb, wb) = b.dims();
    assert!(n == nb && h == hb && w == wb, "concat dims differ");
    let mut out = Tensor::zeros(n, ca + cb, h, w);
    for bi in 0..n {
        for ch in 0..ca {
            out.plane_mut(bi, ch).copy_from_slice(a.plane(bi, ch));
        }
        for ch in 0..cb {
            out.plane_mut(bi, ca + ch).copy_from_slice(b.plane(bi, ch));
        }
    }
    out
}

/// Inverse of [`concat_channels`] for a known split point.
fn split_channels<S: Real>(t: &Tensor<S>, c_first: usize) -> (Tensor<S>, Tensor<S>) {
    let (n, c, h, w) = t.dims();
    assert!(c_first < c, "split point past channel count");
    let mut a = Tensor::zeros(n, c_first, h, w);
    let mut b = Tensor::zeros(n, c - c_first, h, w);
    for bi in 0..n {
        for ch in 0..c_first {
            a.plane_mut(bi, ch).copy_from_slice(t.plane(bi, ch));
        }
        for ch in c_first..c {
            b.plane_mut(bi, ch - c_first)
                .copy_from_slice(t.plane(bi, ch));
        }
    }
    (a, b)
}

fn add<S: Real>(a: &Tensor<S>, b: &Tensor<S>) -> Tensor<S> {
    a.zip_map(b, |x, y| x + y)
}

/// Dual attention block: two 3x3 convs refine the features, channel and
/// spatial attention gate the result in parallel, a 1x1 conv fuses the two
/// gated copies, and the input is added back.
#[derive(Clone, Debug)]
pub struct Dab<S> {
    pub conv1: Conv2d<S>,
    pub conv2: Conv2d<S>,
    pub ca: ChannelAttention<S>,
    pub sa: SpatialAttention<S>,
    pub fuse: Conv2d<S>,
}

/// Intermediate activations needed by [`Dab::backward`].
pub struct DabCache<S> {
    z1: Tensor<S>,
    r1: Tensor<S>,
    f: Tensor<S>,
    ca_cache: CaCache<S>,
    sa_cache: SaCache<S>,
    cat: Tensor<S>,
}

impl<S: Real> Dab<S> {
    pub fn new(channels: usize, ca_reduction: usize, sa_kernel: usize) -> Self {
        Dab {
            conv1: Conv2d::new(channels, channels, 3),
            conv2: Conv2d::new(channels, channels, 3),
            ca: ChannelAttention::new(channels, ca_reduction),
            sa: SpatialAttention::new(sa_kernel),
            fuse: Conv2d::new(2 * channels, channels, 1),
        }
    }

    pub fn forward(&self, x: &Tensor<S>) -> (Tensor<S>, DabCache<S>) {
        let z1 = self.conv1.forward(x);
        let r1 = relu(&z1);
        let f = self.conv2.forward(&r1);
        let (ca_out, ca_cache) = self.ca.forward(&f);
        let (sa_out, sa_cache) = self.sa.forward(&f);
        let cat = concat_channels(&ca_out, &sa_out);
        let fused = self.fuse.forward(&cat);
        let out = add(x, &fused);
        let cache = DabCache {
            z1,
            r1,
            f,
            ca_cache,
            sa_cache,
            cat,
        };
        (out, cache)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, x: &Tensor<S>, cache: &DabCache<S>, gout: &Tensor<S>) -> Tensor<S> {
        let dcat = self.fuse.backward(&cache.cat, gout);
        let (dca, dsa) = split_channels(&dcat, x.c());
        let df_ca = self.ca.backward(&cache.f, &cache.ca_cache, &dca);
        let df_sa = self.sa.backward(&cache.f, &cache.sa_cache, &dsa);
        let df = add(&df_ca, &df_sa);
        let dr1 = self.conv2.backward(&cache.r1, &df);
        let dz1 = relu_backward(&cache.z1, &dr1);
        let dx_branch = self.conv1.backward(x, &dz1);
        add(gout, &dx_branch)
    }

    pub fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut impl FnMut(&str, &mut super::param::Param<S>),
    ) {
        f(&format!("{prefix}.conv1.weight"), &mut self.conv1.weight);
        f(&format!("{prefix}.conv1.bias"), &mut self.conv1.bias);
        f(&format!("{prefix}.conv2.weight"), &mut self.conv2.weight);
        f(&format!("{prefix}.conv2.bias"), &mut self.conv2.bias);
        f(&format!("{prefix}.ca.fc1.weight"), &mut self.ca.fc1.weight);
        f(&format!("{prefix}.ca.fc1.bias"), &mut self.ca.fc1.bias);
        f(&format!("{prefix}.ca.fc2.weight"), &mut self.ca.fc2.weight);
        f(&format!("{prefix}.ca.fc2.bias"), &mut self.ca.fc2.bias);
        f(
            &format!("{prefix}.sa.conv.weight"),
            &mut self.sa.conv.weight,
        );
        f(&format!("{prefix}.sa.conv.bias"), &mut self.sa.conv.bias);
        f(&format!("{prefix}.fuse.weight"), &mut self.fuse.weight);
        f(&format!("{prefix}.fuse.bias"), &mut self.fuse.bias);
    }

    pub fn zero_grad(&mut self) {
        self.conv1.zero_grad();
        self.conv2.zero_grad();
        self.ca.zero_grad();
        self.sa.zero_grad();
        self.fuse.zero_grad();
    }
}

/// Recursive residual group: a chain of attention blocks, a 3x3 tail conv,
/// and a long skip from the group input.
#[derive(Clone, Debug)]
pub struct Rrg<S> {
    pub dabs: Vec<Dab<S>>,
    pub tail: Conv2d<S>,
}

/// Intermediate activations needed by [`Rrg::backward`].
pub struct RrgCache<S> {
    dab_inputs: Vec<Tensor<S>>,
    dab_caches: Vec<DabCache<S>>,
    tail_in: Tensor<S>,
}

impl<S: Real> Rrg<S> {
    pub fn new(channels: usize, n_dab: usize, ca_reduction: usize, sa_kernel: usize) -> Self {
        assert!(n_dab >= 1, "a residual group needs at least one block");
        Rrg {
            dabs: (0..n_dab)
                .map(|_| Dab::new(channels, ca_reduction, sa_kernel))
                .collect(),
            tail: Conv2d::new(channels, channels, 3),
        }
    }

    pub fn forward(&self, x: &Tensor<S>) -> (Tensor<S>, RrgCache<S>) {
        let mut dab_inputs = Vec::with_capacity(self.dabs.len());
        let mut dab_caches = Vec::with_capacity(self.dabs.len());
        let mut cur = x.clone();
        for dab in &self.dabs {
            let (next, cache) = dab.forward(&cur);
            dab_inputs.push(cur);
            dab_caches.push(cache);
            cur = next;
        }
        let tail_out = self.tail.forward(&cur);
        let out = add(x, &tail_out);
        let cache = RrgCache {
            dab_inputs,
            dab_caches,
            tail_in: cur,
        };
        (out, cache)
    }

    /// Accumulates parameter gradients and returns the input gradient.
    pub fn backward(&mut self, cache: &RrgCache<S>, gout: &Tensor<S>) -> Tensor<S> {
        let mut d = self.tail.backward(&cache.tail_in, gout);
        for j in (0..self.dabs.len()).rev() {
            d = self.dabs[j].backward(&cache.dab_inputs[j], &cache.dab_caches[j], &d);
        }
        add(gout, &d)
    }

    pub fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut impl FnMut(&str, &mut super::param::Param<S>),
    ) {
        for (j, dab) in self.dabs.iter_mut().enumerate() {
            dab.visit_params(&format!("{prefix}.dab{j}"), f);
        }
        f(&format!("{prefix}.tail.weight"), &mut self.tail.weight);
        f(&format!("{prefix}.tail.bias"), &mut self.tail.bias);
    }

    pub fn zero_grad(&mut self) {
        for dab in &mut self.dabs {
            dab.zero_grad();
        }
        self.tail.zero_grad();
    }
}

/// Two-conv branch that lifts the 3-channel high-frequency layer into the
/// trunk's feature space.
#[derive(Clone, Debug)]
pub struct Rsgb<S> {
    pub conv1: Conv2d<S>,
    pub conv2: Conv2d<S>,
}

/// Intermediate activations needed by [`Rsgb::backward`].
pub struct RsgbCache<S> {
    z1: Tensor<S>,
    r1: Tensor<S>,
}

impl<S: Real> Rsgb<S> {
    pub fn new(channels: usize) -> Self {
        Rsgb {
            conv1: Conv2d::new(3, channels, 3),
            conv2: Conv2d::new(channels, channels, 3),
        }
    }

    pub fn forward(&self, hf: &Tensor<S>) -> (Tensor<S>, RsgbCache<S>) {
        let z1 = self.conv1.forward(hf);
        let r1 = relu(&z1);
        let out = self.conv2.forward(&r1);
        (out, RsgbCache { z1, r1 })
    }

    /// Accumulates parameter gradients and returns the gradient with
    /// respect to the high-frequency input.
    pub fn backward(
        &mut self,
        hf: &Tensor<S>,
        cache: &RsgbCache<S>,
        gout: &Tensor<S>,
    ) -> Tensor<S> {
        let dr1 = self.conv2.backward(&cache.r1, gout);
        let dz1 = relu_backward(&cache.z1, &dr1);
        self.conv1.backward(hf, &dz1)
    }

    pub fn visit_params(
        &mut self,
        prefix: &str,
        f: &mut impl FnMut(&str, &mut super::param::Param<S>),
    ) {
        f(&format!("{prefix}.conv1.weight"), &mut self.conv1.weight);
        f(&format!("{prefix}.conv1.bias"), &mut self.conv1.bias);
        f(&format!("{prefix}.conv2.weight"), &mut self.conv2.weight);
        f(&format!("{prefix}.conv2.bias"), &mut self.conv2.bias);
    }

    pub fn zero_grad(&mut self) {
        self.conv1.zero_grad();
        self.conv2.zero_grad();
    }
}
