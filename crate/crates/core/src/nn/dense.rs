use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{uniform_init, Matrix, Param, Parameterized};
use crate::error::{Error, Result};
use crate::math::tanh;
use crate::rng::Rng;

/// `tanh(W x + b)` with shape checks.
pub fn dense_forward(x: &[f64], w: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    if w.cols() != x.len() {
        return Err(Error::dim(
            "dense_forward",
            format!("W is {}x{} but x has length {}", w.rows(), w.cols(), x.len()),
        ));
    }
    if w.rows() != b.len() {
        return Err(Error::dim(
            "dense_forward",
            format!("W has {} rows but b has length {}", w.rows(), b.len()),
        ));
    }
    let mut out = vec![0.0; w.rows()];
    affine_tanh(w, b, x, &mut out);
    Ok(out)
}

#[inline]
fn affine_tanh(w: &Matrix, b: &[f64], x: &[f64], out: &mut [f64]) {
    w.matvec_into(x, out);
    for (o, &bi) in out.iter_mut().zip(b) {
        *o = tanh(*o + bi);
    }
}

/// Fully connected layer with a tanh activation.
#[derive(Debug, Clone)]
pub struct Dense {
    weight: Param,
    bias: Param,
}

impl Dense {
    pub fn new(prefix: &str, inputs: usize, outputs: usize, rng: &mut Rng) -> Self {
        let weight = uniform_init(outputs, inputs, inputs, rng);
        let bias = uniform_init(outputs, 1, inputs, rng);
        Dense::from_parts(prefix, weight, bias)
    }

    pub fn zeros(prefix: &str, inputs: usize, outputs: usize) -> Self {
        Dense::from_parts(prefix, Matrix::zeros(outputs, inputs), Matrix::zeros(outputs, 1))
    }

    /// `bias` must be an `outputs x 1` column.
    pub fn from_parts(prefix: &str, weight: Matrix, bias: Matrix) -> Self {
        assert_eq!(weight.rows(), bias.rows(), "dense bias length");
        assert_eq!(bias.cols(), 1, "dense bias must be a column");
        Dense {
            weight: Param::new(name(prefix, "W"), weight),
            bias: Param::new(name(prefix, "b"), bias),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.value().cols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.value().rows()
    }

    pub fn weight(&self) -> &Matrix {
        self.weight.value()
    }

    pub fn bias(&self) -> &[f64] {
        self.bias.value().as_slice()
    }

    pub fn forward(&self, x: &[f64]) -> Result<Vec<f64>> {
        dense_forward(x, self.weight(), self.bias())
    }

    /// Unchecked forward used on hot paths after dimensions were validated.
    #[inline]
    pub fn forward_into(&self, x: &[f64], out: &mut [f64]) {
        affine_tanh(self.weight.value(), self.bias.value().as_slice(), x, out);
    }

    /// Backward through `y = tanh(W x + b)` given `dy`. Accumulates parameter
    /// gradients and adds `W^T dz` into `dx` when provided.
    pub fn backward(&mut self, x: &[f64], y: &[f64], dy: &[f64], dx: Option<&mut [f64]>, dz: &mut [f64]) {
        for ((z, &yi), &g) in dz.iter_mut().zip(y).zip(dy) {
            *z = g * (1.0 - yi * yi);
        }
        self.weight.grad_mut().add_outer(dz, x);
        for (gb, &z) in self.bias.grad_mut().as_mut_slice().iter_mut().zip(dz.iter()) {
            *gb += z;
        }
        if let Some(dx) = dx {
            self.weight.value().matvec_t_add(dz, dx);
        }
    }
}

impl Parameterized for Dense {
    fn params(&self) -> Vec<&Param> {
        vec![&self.weight, &self.bias]
    }

    fn params_mut(&mut self) -> Vec<&mut Param> {
        vec![&mut self.weight, &mut self.bias]
    }
}

fn name(prefix: &str, leaf: &str) -> String {
    format!("{prefix}.{leaf}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_weight_is_plain_tanh() {
        let y = dense_forward(&[0.5], &Matrix::identity(1), &[0.0]).unwrap();
        assert!((y[0] - 0.46211715726).abs() < 1e-11);
    }

    #[test]
    fn zero_layer_outputs_zero() {
        let y = dense_forward(&[3.0, -7.0], &Matrix::zeros(3, 2), &[0.0; 3]).unwrap();
        assert_eq!(y, vec![0.0; 3]);
    }

    #[test]
    fn bias_cancels_input() {
        let w = Matrix::from_rows(&[[1.0, 1.0]]).unwrap();
        let y = dense_forward(&[1.0, 1.0], &w, &[-2.0]).unwrap();
        assert_eq!(y, vec![0.0]);
    }

    #[test]
    fn shape_errors_name_operands() {
        let err = dense_forward(&[1.0], &Matrix::zeros(2, 3), &[0.0; 2]).unwrap_err();
        let msg = alloc::string::ToString::to_string(&err);
        assert!(msg.contains("W is 2x3") && msg.contains("x has length 1"), "{msg}");
        let err = dense_forward(&[1.0; 3], &Matrix::zeros(2, 3), &[0.0; 1]).unwrap_err();
        assert!(matches!(err, Error::Dimension { op: "dense_forward", .. }));
    }
}
