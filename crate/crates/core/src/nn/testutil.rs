//! Deterministic pseudo-random tensors and parameters for unit tests.

use crate::real::Real;

use super::param::Param;
use super::tensor::Tensor;

fn hash_unit(seed: u64, idx: u64) -> f64 {
    let mut v = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(idx + 1);
    v ^= v >> 30;
    v = v.wrapping_mul(0xbf58476d1ce4e5b9);
    v ^= v >> 27;
    (v >> 11) as f64 / (1u64 << 53) as f64
}

/// Values in (-0.5, 0.5), reproducible from the seed.
pub fn hash_tensor<S: Real>(n: usize, c: usize, h: usize, w: usize, seed: u64) -> Tensor<S> {
    let mut idx = 0u64;
    Tensor::from_fn(n, c, h, w, |_, _, _, _| {
        idx += 1;
        S::lit(hash_unit(seed, idx) - 0.5)
    })
}

/// Fills parameter values with centered hash noise scaled by `scale`.
pub fn fill_param<S: Real>(p: &mut Param<S>, seed: u64, scale: f64) {
    for (i, v) in p.values.iter_mut().enumerate() {
        *v = S::lit((hash_unit(seed, i as u64) - 0.5) * scale);
    }
}
