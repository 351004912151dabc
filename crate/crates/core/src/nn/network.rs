//! Residual restoration network.
//!
//! A 3x3 conv lifts the rainy image into feature space, a chain of
//! residual groups refines it (each group optionally fused with features
//! from the high-frequency layer), and a 3x3 head predicts the streak
//! layer `S`. The clean estimate is `B = I - S`, so a network whose head
//! is zero returns its input unchanged; initialization exploits that to
//! start training from the identity.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::real::Real;

use super::blocks::{Rrg, RrgCache, Rsgb, RsgbCache};
use super::conv::Conv2d;
use super::param::Param;
use super::tensor::Tensor;

/// Architecture hyper-parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetworkConfig {
    pub n_rrg: usize,
    pub n_dab_per_rrg: usize,
    pub channels: usize,
    pub ca_reduction: usize,
    pub sa_kernel: usize,
    pub use_rsgb: bool,
}

impl Default for NetworkConfig {
    fn default() -> Self {
        NetworkConfig {
            n_rrg: 4,
            n_dab_per_rrg: 8,
            channels: 64,
            ca_reduction: 8,
            sa_kernel: 7,
            use_rsgb: true,
        }
    }
}

impl NetworkConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.n_rrg < 1 {
            return Err("n_rrg must be at least 1".into());
        }
        if self.n_dab_per_rrg < 1 {
            return Err("n_dab_per_rrg must be at least 1".into());
        }
        if self.ca_reduction < 1 {
            return Err("ca_reduction must be at least 1".into());
        }
        if self.channels < 4 * self.ca_reduction {
            return Err(format!(
                "channels {} must be at least 4x ca_reduction {}",
                self.channels, self.ca_reduction
            ));
        }
        if !self.channels.is_multiple_of(self.ca_reduction) {
            return Err(format!(
                "channels {} must be divisible by ca_reduction {}",
                self.channels, self.ca_reduction
            ));
        }
        if self.sa_kernel.is_multiple_of(2) {
            return Err(format!("sa_kernel {} must be odd", self.sa_kernel));
        }
        Ok(())
    }

    /// Short identity string, stable across runs, for reports and logs.
    pub fn fingerprint(&self) -> String {
        format!(
            "rrg{}-dab{}-c{}-car{}-sak{}-hf{}",
            self.n_rrg,
            self.n_dab_per_rrg,
            self.channels,
            self.ca_reduction,
            self.sa_kernel,
            u8::from(self.use_rsgb)
        )
    }
}

/// Intermediate activations needed by [`Network::backward`].
pub struct NetCache<S> {
    i: Tensor<S>,
    hf: Tensor<S>,
    rsgb_caches: Vec<RsgbCache<S>>,
    rrg_caches: Vec<RrgCache<S>>,
    trunk_tail: Tensor<S>,
}

#[derive(Clone, Debug)]
pub struct Network<S> {
    pub config: NetworkConfig,
    pub trunk_in: Conv2d<S>,
    pub rrgs: Vec<Rrg<S>>,
    pub rsgbs: Vec<Rsgb<S>>,
    pub trunk_out: Conv2d<S>,
}

/// FNV-1a over the global seed and the parameter name, so every layer
/// draws from its own stream and layers shared between two architectures
/// initialize identically.
fn layer_seed(seed: u64, name: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in seed.to_le_bytes().iter().copied().chain(name.bytes()) {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Parameter names whose layers start at zero: attention gate heads (so
/// gates open at exactly 1/2) and the output head (so the network starts
/// as the identity).
fn zero_initialized(name: &str) -> bool {
    let stem = name.strip_suffix(".weight").unwrap_or(name);
    stem.ends_with("ca.fc2") || stem.ends_with("sa.conv") || stem == "trunk_out"
}

impl<S: Real> Network<S> {
    /// All parameters zero; panics on an invalid config.
    pub fn new(config: NetworkConfig) -> Self {
        config.validate().expect("invalid network config");
        let c = config.channels;
        let rsgbs = if config.use_rsgb {
            (0..config.n_rrg).map(|_| Rsgb::new(c)).collect()
        } else {
            Vec::new()
        };
        Network {
            config,
            trunk_in: Conv2d::new(3, c, 3),
            rrgs: (0..config.n_rrg)
                .map(|_| {
                    Rrg::new(
                        c,
                        config.n_dab_per_rrg,
                        config.ca_reduction,
                        config.sa_kernel,
                    )
                })
                .collect(),
            rsgbs,
            trunk_out: Conv2d::new(c, 3, 3),
        }
    }

    /// Fan-in uniform initialization with per-layer seeds, except the
    /// gate and output heads which stay zero (see `zero_initialized`);
    /// biases start at zero everywhere.
    pub fn init(config: NetworkConfig, seed: u64) -> Self {
        let mut net = Network::new(config);
        net.visit_params(|name, p| {
            if !name.ends_with(".weight") || zero_initialized(name) {
                return;
            }
            // Weight dims are [out, in, k, k].
            let fan_in = p.dims[1] * p.dims[2] * p.dims[3];
            let bound = 1.0 / (fan_in as f64).sqrt();
            let mut rng = ChaCha8Rng::seed_from_u64(layer_seed(seed, name));
            for v in p.values.iter_mut() {
                *v = S::lit((rng.gen::<f64>() * 2.0 - 1.0) * bound);
            }
        });
        net
    }

    /// Fills every parameter (weights and biases) with nonzero noise.
    /// Gradient checks use this so that no backward path is scaled by an
    /// exact zero; real training starts from [`Network::init`] instead.
    pub fn randomize_params(&mut self, seed: u64, scale: f64) {
        self.visit_params(|name, p| {
            let mut rng = ChaCha8Rng::seed_from_u64(layer_seed(seed, name));
            for v in p.values.iter_mut() {
                *v = S::lit((rng.gen::<f64>() * 2.0 - 1.0) * scale);
            }
        });
    }

    /// Predicts the clean image `B = I - S` from the rainy image and its
    /// high-frequency layer. `hf` is consulted only when the config
    /// enables the high-frequency branch, but must always have `i`'s
    /// dims.
    pub fn forward(&self, i: &Tensor<S>, hf: &Tensor<S>) -> (Tensor<S>, NetCache<S>) {
        assert_eq!(i.c(), 3, "network expects 3-channel input");
        assert!(i.same_dims(hf), "image and high-frequency dims differ");
        let mut cur = self.trunk_in.forward(i);
        let mut rsgb_caches = Vec::with_capacity(self.rsgbs.len());
        let mut rrg_caches = Vec::with_capacity(self.rrgs.len());
        for (idx, rrg) in self.rrgs.iter().enumerate() {
            if self.config.use_rsgb {
                let (hf_feat, rc) = self.rsgbs[idx].forward(hf);
                rsgb_caches.push(rc);
                cur = cur.zip_map(&hf_feat, |a, b| a + b);
            }
            let (next, cache) = rrg.forward(&cur);
            rrg_caches.push(cache);
            cur = next;
        }
        let s_hat = self.trunk_out.forward(&cur);
        let b_hat = i.zip_map(&s_hat, |a, b| a - b);
        let cache = NetCache {
            i: i.clone(),
            hf: hf.clone(),
            rsgb_caches,
            rrg_caches,
            trunk_tail: cur,
        };
        (b_hat, cache)
    }

    /// Accumulates parameter gradients from the clean-estimate gradient
    /// and returns the gradient with respect to the input image.
    pub fn backward(&mut self, cache: &NetCache<S>, d_bhat: &Tensor<S>) -> Tensor<S> {
        // B = I - S, so the streak head sees the negated gradient.
        let d_s = d_bhat.map(|v| -v);
        let mut d_cur = self.trunk_out.backward(&cache.trunk_tail, &d_s);
        for idx in (0..self.rrgs.len()).rev() {
            let d_fused = self.rrgs[idx].backward(&cache.rrg_caches[idx], &d_cur);
            if self.config.use_rsgb {
                // The fusion is an addition: the trunk and hf branches
                // both receive d_fused. The hf input is fixed during
                // training, so its own gradient is dropped.
                let _ = self.rsgbs[idx].backward(&cache.hf, &cache.rsgb_caches[idx], &d_fused);
            }
            d_cur = d_fused;
        }
        let d_i_trunk = self.trunk_in.backward(&cache.i, &d_cur);
        d_i_trunk.zip_map(d_bhat, |a, b| a + b)
    }

    /// Visits every parameter in a fixed order with a stable name; the
    /// checkpoint layout and the optimizer both rely on this order.
    pub fn visit_params(&mut self, mut f: impl FnMut(&str, &mut Param<S>)) {
        f("trunk_in.weight", &mut self.trunk_in.weight);
        f("trunk_in.bias", &mut self.trunk_in.bias);
        for idx in 0..self.rrgs.len() {
            if self.config.use_rsgb {
                self.rsgbs[idx].visit_params(&format!("rsgb{idx}"), &mut f);
            }
            self.rrgs[idx].visit_params(&format!("rrg{idx}"), &mut f);
        }
        f("trunk_out.weight", &mut self.trunk_out.weight);
        f("trunk_out.bias", &mut self.trunk_out.bias);
    }

    pub fn zero_grad(&mut self) {
        self.trunk_in.zero_grad();
        for rrg in &mut self.rrgs {
            rrg.zero_grad();
        }
        for rsgb in &mut self.rsgbs {
            rsgb.zero_grad();
        }
        self.trunk_out.zero_grad();
    }

    pub fn param_count(&mut self) -> usize {
        let mut total = 0;
        self.visit_params(|_, p| total += p.len());
        total
    }

    /// Casts every parameter to another scalar type (used to run the
    /// gradient checks of an `f32` training configuration in `f64`).
    pub fn cast<T: Real>(&mut self) -> Network<T> {
        let mut out = Network::<T>::new(self.config);
        let mut values: Vec<Vec<T>> = Vec::new();
        self.visit_params(|_, p| {
            values.push(p.values.iter().map(|v| T::lit(v.to_f64_lossy())).collect());
        });
        let mut it = values.into_iter();
        out.visit_params(|_, p| {
            let v = it.next().expect("same parameter count");
            p.set_values(v);
        });
        out
    }
}
