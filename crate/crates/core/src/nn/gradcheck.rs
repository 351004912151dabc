//! Central-difference validation of analytic gradients.
//!
//! The pattern shared by all layer checks: pick a scalar objective
//! `L(theta) = sum(forward(theta) .* d)` for a fixed random direction `d`,
//! compute analytic gradients once, then probe sampled coordinates with
//! `(L(theta_i + h) - L(theta_i - h)) / 2h` and compare relative error.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::network::Network;
use super::tensor::Tensor;

/// Default probe step for central differences.
pub const FD_STEP: f64 = 1e-5;

/// Default acceptance threshold on the relative error.
pub const FD_TOLERANCE: f64 = 1e-4;

/// Relative error with the denominator floored so that near-zero pairs
/// compare absolutely instead of blowing up.
pub fn relative_error(numeric: f64, analytic: f64) -> f64 {
    let denom = numeric.abs().max(analytic.abs()).max(1e-8);
    (numeric - analytic).abs() / denom
}

/// Picks `count` distinct coordinates out of `len`, or all of them when
/// `len <= count`. Deterministic for a given seed.
pub fn sample_coords(len: usize, count: usize, seed: u64) -> Vec<usize> {
    if len <= count {
        return (0..len).collect();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = Vec::with_capacity(count);
    while picked.len() < count {
        let i = rng.gen_range(0..len);
        if !picked.contains(&i) {
            picked.push(i);
        }
    }
    picked
}

/// Worst relative error between analytic derivatives and central
/// differences over the given coordinates.
///
/// `eval_shifted(i, delta)` must return the objective with coordinate `i`
/// temporarily displaced by `delta`, restoring the original value before
/// returning. `analytic(i)` returns the derivative produced by the
/// backward pass.
pub fn max_fd_error(
    coords: &[usize],
    h: f64,
    mut eval_shifted: impl FnMut(usize, f64) -> f64,
    analytic: impl Fn(usize) -> f64,
) -> f64 {
    let mut worst = 0.0f64;
    for &i in coords {
        let plus = eval_shifted(i, h);
        let minus = eval_shifted(i, -h);
        let numeric = (plus - minus) / (2.0 * h);
        worst = worst.max(relative_error(numeric, analytic(i)));
    }
    worst
}

fn dot_objective(net: &Network<f64>, i: &Tensor<f64>, hf: &Tensor<f64>, d: &Tensor<f64>) -> f64 {
    let (out, _) = net.forward(i, hf);
    out.data.iter().zip(&d.data).map(|(&a, &b)| a * b).sum()
}

/// Applies `f` to one scalar coordinate of the `idx`-th parameter tensor
/// in visit order.
fn modify_param(net: &mut Network<f64>, idx: usize, coord: usize, f: impl FnOnce(&mut f64)) {
    let mut k = 0usize;
    let mut f = Some(f);
    net.visit_params(|_, p| {
        if k == idx {
            (f.take().expect("parameter visited once"))(&mut p.values[coord]);
        }
        k += 1;
    });
    assert!(f.is_none(), "parameter index {idx} out of range");
}

/// Checks every parameter tensor of the network (plus the input-image
/// gradient) against central differences on `samples_per_param` randomly
/// chosen coordinates each, and returns the worst relative error.
///
/// The objective is `sum(forward(i, hf) .* direction)`: linear in the
/// output, smooth in the parameters, so the only nondifferentiable points
/// are relu kinks and max-map ties, which have measure zero under the
/// random probes used by the callers.
pub fn network_max_fd_error(
    net: &mut Network<f64>,
    i: &Tensor<f64>,
    hf: &Tensor<f64>,
    direction: &Tensor<f64>,
    samples_per_param: usize,
    seed: u64,
    h: f64,
) -> f64 {
    net.zero_grad();
    let (_, cache) = net.forward(i, hf);
    let d_i = net.backward(&cache, direction);
    let mut analytic: Vec<Vec<f64>> = Vec::new();
    net.visit_params(|_, p| analytic.push(p.grad.clone()));

    let mut worst = 0.0f64;
    for (pi, grads) in analytic.iter().enumerate() {
        let coords = sample_coords(grads.len(), samples_per_param, seed.wrapping_add(pi as u64));
        let err = max_fd_error(
            &coords,
            h,
            |ci, delta| {
                let mut orig = 0.0;
                modify_param(net, pi, ci, |v| {
                    orig = *v;
                    *v += delta;
                });
                let l = dot_objective(net, i, hf, direction);
                modify_param(net, pi, ci, |v| *v = orig);
                l
            },
            |ci| grads[ci],
        );
        worst = worst.max(err);
    }

    // Input-image gradient, probed on a scratch copy.
    let mut probe = i.clone();
    let coords = sample_coords(i.len(), samples_per_param.max(8), seed ^ 0xab12cd34);
    let err = max_fd_error(
        &coords,
        h,
        |ci, delta| {
            let orig = probe.data[ci];
            probe.data[ci] = orig + delta;
            let l = dot_objective(net, &probe, hf, direction);
            probe.data[ci] = orig;
            l
        },
        |ci| d_i.data[ci],
    );
    worst.max(err)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sampled_coords_are_distinct_and_in_range() {
        let coords = sample_coords(100, 20, 7);
        assert_eq!(coords.len(), 20);
        for (i, &a) in coords.iter().enumerate() {
            assert!(a < 100);
            assert!(!coords[i + 1..].contains(&a));
        }
        assert_eq!(coords, sample_coords(100, 20, 7));
    }

    #[test]
    fn small_spaces_are_checked_exhaustively() {
        assert_eq!(sample_coords(5, 20, 1), vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn quadratic_objective_passes() {
        // L(x) = sum x_i^2 with analytic gradient 2x.
        let mut x = [0.3f64, -1.2, 0.7];
        let grad: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        let coords = [0usize, 1, 2];
        let err = max_fd_error(
            &coords,
            FD_STEP,
            |i, d| {
                let orig = x[i];
                x[i] = orig + d;
                let l = x.iter().map(|v| v * v).sum();
                x[i] = orig;
                l
            },
            |i| grad[i],
        );
        assert!(err <= FD_TOLERANCE, "err {err}");
    }

    #[test]
    fn wrong_gradient_is_caught() {
        let mut x = [0.5f64, 1.5];
        let bogus: Vec<f64> = x.iter().map(|v| 3.0 * v).collect();
        let coords = [0usize, 1];
        let err = max_fd_error(
            &coords,
            FD_STEP,
            |i, d| {
                let orig = x[i];
                x[i] = orig + d;
                let l = x.iter().map(|v| v * v).sum();
                x[i] = orig;
                l
            },
            |i| bogus[i],
        );
        assert!(
            err > 0.1,
            "bogus gradient should show large error, got {err}"
        );
    }

    #[test]
    fn relative_error_floors_tiny_denominators() {
        assert_eq!(relative_error(0.0, 0.0), 0.0);
        let e = relative_error(1e-12, -1e-12);
        assert!(e < 1e-3, "sub-floor disagreement must not explode: {e}");
    }
}
