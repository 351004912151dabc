//! Learnable parameter storage: values, accumulated gradient, and the
//! optimizer's two moment buffers, kept together so a parameter moves
//! through training, checkpointing and restarts as one unit.

use crate::real::Real;

#[derive(Clone, Debug)]
pub struct Param<S> {
    pub dims: Vec<usize>,
    pub values: Vec<S>,
    pub grad: Vec<S>,
    /// First-moment (mean of gradients) optimizer buffer.
    pub m: Vec<S>,
    /// Second-moment (mean of squared gradients) optimizer buffer.
    pub v: Vec<S>,
}

impl<S: Real> Param<S> {
    pub fn zeros(dims: &[usize]) -> Self {
        let len = dims.iter().product();
        assert!(len > 0, "parameter must have at least one element");
        Param {
            dims: dims.to_vec(),
            values: vec![S::zero(); len],
            grad: vec![S::zero(); len],
            m: vec![S::zero(); len],
            v: vec![S::zero(); len],
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn zero_grad(&mut self) {
        for g in &mut self.grad {
            *g = S::zero();
        }
    }

    /// Replaces the values, keeping gradient and moment buffers zeroed.
    pub fn set_values(&mut self, values: Vec<S>) {
        assert_eq!(values.len(), self.values.len(), "parameter size mismatch");
        self.values = values;
    }
}
