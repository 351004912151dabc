//! Hybrid absolute/quadratic penalty.
//!
//! `psi(z)` is `|z|` beyond the knee `c` and a parabola `(z^2 + c^2) / 2c`
//! inside it; the two branches meet with matching value and slope at
//! `|z| = c`, so the loss is C1 everywhere. The quadratic floor keeps the
//! gradient proportional near zero instead of saturating at the sign
//! function, while large residuals are penalized linearly like L1.

use crate::real::Real;

use super::tensor::Tensor;

/// Per-element penalty; `c` is the knee between the branches.
pub fn psi(z: f64, c: f64) -> f64 {
    assert!(c > 0.0, "loss knee must be positive, got {c}");
    if z.abs() > c {
        z.abs()
    } else {
        (z * z + c * c) / (2.0 * c)
    }
}

/// Derivative of [`psi`] with respect to `z`.
pub fn psi_prime(z: f64, c: f64) -> f64 {
    assert!(c > 0.0, "loss knee must be positive, got {c}");
    if z.abs() > c {
        z.signum()
    } else {
        z / c
    }
}

/// Sum of [`psi`] over the residual `b_true - b_hat`, plus the gradient
/// with respect to `b_hat`. The loss accumulates in `f64` regardless of
/// the tensor scalar so logged values do not drift with batch size.
pub fn huber_loss<S: Real>(b_hat: &Tensor<S>, b_true: &Tensor<S>, c: f64) -> (f64, Tensor<S>) {
    assert!(b_hat.same_dims(b_true), "loss operands must share dims");
    assert!(c > 0.0, "loss knee must be positive, got {c}");
    let mut loss = 0.0f64;
    let grad = b_hat.zip_map(b_true, |bh, bt| {
        let z = bt.to_f64_lossy() - bh.to_f64_lossy();
        loss += psi(z, c);
        S::lit(-psi_prime(z, c))
    });
    (loss, grad)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::testutil::hash_tensor;

    const C: f64 = 2.0 / 255.0;

    #[test]
    fn value_at_zero_is_half_the_knee() {
        assert!((psi(0.0, C) - 1.0 / 255.0).abs() < 1e-15);
    }

    #[test]
    fn branches_agree_at_the_knee() {
        // Quadratic branch evaluated exactly at |z| = c…
        let quad = (C * C + C * C) / (2.0 * C);
        // …and the absolute branch approached from outside.
        let outside = psi(C * (1.0 + 1e-9), C);
        assert!((psi(C, C) - C).abs() <= 1e-12);
        assert!((psi(-C, C) - C).abs() <= 1e-12);
        assert!((quad - C).abs() <= 1e-12);
        assert!((outside - C).abs() <= 1e-9);
    }

    #[test]
    fn large_residuals_cost_their_magnitude() {
        assert_eq!(psi(1.0, C), 1.0);
        assert_eq!(psi(-0.75, C), 0.75);
    }

    #[test]
    fn derivative_reference_points() {
        assert_eq!(psi_prime(C / 2.0, C), 0.5);
        assert_eq!(psi_prime(C, C), 1.0);
        assert_eq!(psi_prime(-C, C), -1.0);
        assert_eq!(psi_prime(2.0 * C, C), 1.0);
        assert_eq!(psi_prime(-2.0 * C, C), -1.0);
        assert_eq!(psi_prime(0.0, C), 0.0);
    }

    #[test]
    fn derivative_matches_finite_differences_on_knee_avoiding_grid() {
        // Midpoint grid over [-3c, 3c]: the closest point sits ~1.6e-5
        // from the knees, farther than the probe step.
        let h = 1e-6;
        let mut worst = 0.0f64;
        for k in 0..500 {
            let z = -3.0 * C + (k as f64 + 0.5) * 6.0 * C / 500.0;
            let numeric = (psi(z + h, C) - psi(z - h, C)) / (2.0 * h);
            worst = worst.max((numeric - psi_prime(z, C)).abs());
        }
        assert!(worst <= 1e-6, "worst derivative gap {worst}");
    }

    #[test]
    fn loss_is_minimal_with_zero_gradient_at_equality() {
        let x = hash_tensor::<f32>(2, 3, 4, 4, 150);
        let (loss, grad) = huber_loss(&x, &x, C);
        let pixels = x.len() as f64;
        assert!((loss - pixels * C / 2.0).abs() <= 1e-12 * pixels);
        assert!(grad.data.iter().all(|&g| g == 0.0));
    }

    #[test]
    fn gradient_points_from_estimate_toward_target() {
        // b_hat above b_true: increasing b_hat further must increase the
        // loss, so the gradient w.r.t. b_hat is positive.
        let b_true = Tensor::<f64>::zeros(1, 1, 1, 2);
        let mut b_hat = Tensor::<f64>::zeros(1, 1, 1, 2);
        b_hat.data[0] = 0.5;
        b_hat.data[1] = -0.003;
        let (_, grad) = huber_loss(&b_hat, &b_true, C);
        assert_eq!(grad.data[0], 1.0);
        assert!(grad.data[1] < 0.0 && grad.data[1] > -1.0);
    }

    #[test]
    fn tensor_loss_gradient_matches_finite_differences() {
        let mut b_hat = hash_tensor::<f64>(1, 3, 4, 4, 151);
        let b_true = hash_tensor::<f64>(1, 3, 4, 4, 152);
        let (_, grad) = huber_loss(&b_hat, &b_true, C);
        let h = 1e-7;
        let mut worst = 0.0f64;
        for i in 0..b_hat.len() {
            let orig = b_hat.data[i];
            b_hat.data[i] = orig + h;
            let lp = huber_loss(&b_hat, &b_true, C).0;
            b_hat.data[i] = orig - h;
            let lm = huber_loss(&b_hat, &b_true, C).0;
            b_hat.data[i] = orig;
            let numeric = (lp - lm) / (2.0 * h);
            worst = worst.max((numeric - grad.data[i]).abs());
        }
        assert!(worst <= 1e-6, "worst gradient gap {worst}");
    }

    #[test]
    #[should_panic(expected = "loss knee must be positive")]
    fn nonpositive_knee_is_rejected() {
        psi(0.1, 0.0);
    }
}
