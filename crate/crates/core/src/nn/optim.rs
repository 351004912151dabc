//! Bias-corrected Adam and the cosine learning-rate schedule.

use crate::real::Real;

use super::network::Network;
use super::param::Param;

/// Optimizer constants and the shared step counter; the per-parameter
/// moment buffers live next to their parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdamState {
    pub t: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamState {
    fn default() -> Self {
        AdamState {
            t: 0,
            beta1: 0.9,
            beta2: 0.99,
            epsilon: 1e-8,
        }
    }
}

/// One Adam update of a single parameter tensor at step `t` (already
/// incremented for this step). Moment and update arithmetic runs in
/// `f64`; results narrow back to the parameter scalar.
pub fn adam_update_param<S: Real>(p: &mut Param<S>, state: &AdamState, lr: f64) {
    debug_assert!(state.t >= 1, "adam step counter must be incremented first");
    let b1 = state.beta1;
    let b2 = state.beta2;
    let bc1 = 1.0 - b1.powi(state.t as i32);
    let bc2 = 1.0 - b2.powi(state.t as i32);
    for k in 0..p.values.len() {
        let g = p.grad[k].to_f64_lossy();
        let m = b1 * p.m[k].to_f64_lossy() + (1.0 - b1) * g;
        let v = b2 * p.v[k].to_f64_lossy() + (1.0 - b2) * g * g;
        p.m[k] = S::lit(m);
        p.v[k] = S::lit(v);
        let m_hat = m / bc1;
        let v_hat = v / bc2;
        let update = lr * m_hat / (v_hat.sqrt() + state.epsilon);
        p.values[k] = S::lit(p.values[k].to_f64_lossy() - update);
    }
}

/// One optimizer step over every parameter of the network; increments the
/// step counter exactly once.
pub fn adam_step<S: Real>(net: &mut Network<S>, state: &mut AdamState, lr: f64) {
    state.t += 1;
    let snapshot = *state;
    net.visit_params(|_, p| adam_update_param(p, &snapshot, lr));
}

/// Cosine annealing from `lr_max` (step 0) down to `lr_min` (step =
/// total).
pub fn cosine_lr(step: u32, total: u32, lr_max: f64, lr_min: f64) -> f64 {
    assert!(total >= 1, "schedule length must be at least 1");
    assert!(step <= total, "step {step} past schedule end {total}");
    let phase = std::f64::consts::PI * step as f64 / total as f64;
    lr_min + 0.5 * (lr_max - lr_min) * (1.0 + phase.cos())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::network::NetworkConfig;

    fn tiny_config() -> NetworkConfig {
        NetworkConfig {
            n_rrg: 1,
            n_dab_per_rrg: 1,
            channels: 4,
            ca_reduction: 1,
            sa_kernel: 3,
            use_rsgb: true,
        }
    }

    #[test]
    fn zero_gradients_leave_parameters_and_moments_unchanged() {
        let mut net = Network::<f32>::init(tiny_config(), 1);
        let mut before = Vec::new();
        net.visit_params(|_, p| before.extend_from_slice(&p.values));
        let mut state = AdamState::default();
        adam_step(&mut net, &mut state, 1e-3);
        let mut after = Vec::new();
        net.visit_params(|_, p| {
            after.extend_from_slice(&p.values);
            assert!(p.m.iter().all(|&m| m == 0.0));
            assert!(p.v.iter().all(|&v| v == 0.0));
        });
        assert_eq!(before, after);
        assert_eq!(state.t, 1);
    }

    #[test]
    fn first_step_moves_against_the_gradient_by_about_lr() {
        let lr = 1e-3;
        let mut p = Param::<f64>::zeros(&[2]);
        p.values = vec![0.25, -0.5];
        p.grad = vec![3.0, -0.02];
        let state = AdamState {
            t: 1,
            ..AdamState::default()
        };
        adam_update_param(&mut p, &state, lr);
        // Bias correction makes m_hat = g and v_hat = g^2, so the update
        // is lr·g/(|g| + eps) ≈ lr·sign(g).
        let d0 = 0.25 - p.values[0];
        let d1 = -0.5 - p.values[1];
        assert!((d0 - lr).abs() < 1e-8, "moved {d0}");
        assert!((d1 + lr).abs() < 1e-6, "moved {d1}");
    }

    #[test]
    fn identical_gradients_evolve_identically() {
        let mut a = Param::<f32>::zeros(&[3]);
        let mut b = Param::<f32>::zeros(&[3]);
        a.values = vec![0.1, 0.2, 0.3];
        b.values = vec![0.1, 0.2, 0.3];
        let mut state = AdamState::default();
        for step in 1..=5u32 {
            state.t = step;
            let g = vec![0.5 / step as f32, -0.25, 0.125 * step as f32];
            a.grad = g.clone();
            b.grad = g;
            adam_update_param(&mut a, &state, 2e-3);
            adam_update_param(&mut b, &state, 2e-3);
        }
        assert_eq!(a.values, b.values);
        assert_eq!(a.m, b.m);
        assert_eq!(a.v, b.v);
    }

    #[test]
    fn cosine_schedule_hits_both_ends_and_the_midpoint() {
        let (hi, lo) = (1e-4, 1e-6);
        let start = cosine_lr(0, 100, hi, lo);
        let mid = cosine_lr(50, 100, hi, lo);
        let end = cosine_lr(100, 100, hi, lo);
        assert!((start - hi).abs() <= 1e-12 * hi);
        assert!((mid - (hi + lo) / 2.0).abs() <= 1e-12);
        assert!((end - lo).abs() <= 1e-12 * lo);
        // Monotone decrease across the whole schedule.
        let mut prev = start;
        for s in 1..=100 {
            let cur = cosine_lr(s, 100, hi, lo);
            assert!(cur <= prev, "schedule rose at step {s}");
            prev = cur;
        }
    }

    #[test]
    #[should_panic(expected = "past schedule end")]
    fn step_past_the_end_is_rejected() {
        cosine_lr(11, 10, 1e-4, 1e-6);
    }
}
