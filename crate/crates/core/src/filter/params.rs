//! Filter parameter bundle.

/// Parameters of the weighted guided filter.
///
/// `zeta` is the window radius of the linear fits and of the coefficient
/// aggregation; `lambda` penalizes large slopes; `epsilon` stabilizes the
/// edge-aware weighting; `eta` is the temperature of the residual-energy
/// aggregation weights.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterParams {
    pub zeta: usize,
    pub lambda: f64,
    pub epsilon: f64,
    pub eta: f64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            zeta: 15,
            lambda: 1e-4,
            epsilon: 1e-6,
            eta: 1e-3,
        }
    }
}

impl FilterParams {
    /// Checks the value constraints; the string names the offending field.
    pub fn validate(&self) -> Result<(), super::FilterError> {
        let bad = |msg: &str| Err(super::FilterError::InvalidParams(msg.to_string()));
        if self.zeta < 1 {
            return bad("zeta must be >= 1");
        }
        if self.lambda.is_nan() || self.lambda < 0.0 {
            return bad("lambda must be >= 0");
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return bad("epsilon must be > 0");
        }
        if self.eta.is_nan() || self.eta <= 0.0 {
            return bad("eta must be > 0");
        }
        Ok(())
    }
}
