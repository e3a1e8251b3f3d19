use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::Matrix;
use crate::rng;

/// A named trainable tensor with its gradient slot and Adam moments.
#[derive(Debug, Clone)]
pub struct Param {
    name: String,
    pub(crate) value: Matrix,
    pub(crate) grad: Matrix,
    frozen: bool,
    pub(crate) moment1: Vec<f64>,
    pub(crate) moment2: Vec<f64>,
}

impl Param {
    pub fn new(name: impl Into<String>, value: Matrix) -> Self {
        let (r, c) = value.shape();
        Param {
            name: name.into(),
            grad: Matrix::zeros(r, c),
            moment1: vec![0.0; r * c],
            moment2: vec![0.0; r * c],
            value,
            frozen: false,
        }
    }

    pub fn frozen(name: impl Into<String>, value: Matrix) -> Self {
        let mut p = Param::new(name, value);
        p.frozen = true;
        p
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn value(&self) -> &Matrix {
        &self.value
    }

    /// Mutable access to the value; `None` for frozen parameters.
    pub fn value_mut(&mut self) -> Option<&mut Matrix> {
        if self.frozen {
            None
        } else {
            Some(&mut self.value)
        }
    }

    pub fn grad(&self) -> &Matrix {
        &self.grad
    }

    pub fn grad_mut(&mut self) -> &mut Matrix {
        &mut self.grad
    }

    pub fn is_frozen(&self) -> bool {
        self.frozen
    }

    /// Unfreezing is allowed (fine-tuning); freezing an unfrozen value is too.
    pub fn set_frozen(&mut self, frozen: bool) {
        self.frozen = frozen;
    }

    pub fn zero_grad(&mut self) {
        self.grad.fill(0.0);
    }

    pub fn len(&self) -> usize {
        self.value.len()
    }

    pub fn is_empty(&self) -> bool {
        self.value.is_empty()
    }
}

/// Anything that owns parameters in a fixed, documented order.
pub trait Parameterized {
    fn params(&self) -> Vec<&Param>;
    fn params_mut(&mut self) -> Vec<&mut Param>;

    fn zero_grads(&mut self) {
        for p in self.params_mut() {
            p.zero_grad();
        }
    }

    /// Total number of scalar parameters, frozen ones included.
    fn param_count(&self) -> usize {
        self.params().iter().map(|p| p.len()).sum()
    }

    fn all_finite(&self) -> bool {
        self.params().iter().all(|p| p.value().is_finite())
    }
}

/// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
pub fn uniform_init(rows: usize, cols: usize, fan_in: usize, rng: &mut rng::Rng) -> Matrix {
    let bound = 1.0 / crate::math::sqrt(fan_in.max(1) as f64);
    let data = (0..rows * cols)
        .map(|_| rng.random_range(-bound..=bound))
        .collect();
    Matrix::from_vec(rows, cols, data).expect("shape by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_param_refuses_mutation() {
        let mut p = Param::frozen("w", Matrix::identity(2));
        assert!(p.value_mut().is_none());
        p.grad_mut().fill(1.0);
        assert_eq!(p.grad().shape(), p.value().shape());
    }

    #[test]
    fn init_respects_bound() {
        let mut r = rng::seeded(1);
        let m = uniform_init(8, 16, 16, &mut r);
        assert!(m.as_slice().iter().all(|v| v.abs() <= 0.25));
        let again = uniform_init(8, 16, 16, &mut rng::seeded(1));
        assert_eq!(m, again);
    }
}
