use alloc::format;

use super::Matrix;
use crate::error::{Error, Result};

/// Mean of squared elementwise differences.
pub fn mse(pred: &Matrix, actual: &Matrix) -> Result<f64> {
    if pred.shape() != actual.shape() {
        return Err(Error::dim(
            "mse",
            format!("pred is {:?}, actual is {:?}", pred.shape(), actual.shape()),
        ));
    }
    mse_slices(pred.as_slice(), actual.as_slice())
}

pub fn mse_slices(pred: &[f64], actual: &[f64]) -> Result<f64> {
    if pred.len() != actual.len() {
        return Err(Error::dim(
            "mse",
            format!("pred has {} values, actual has {}", pred.len(), actual.len()),
        ));
    }
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .iter()
        .zip(actual)
        .map(|(p, a)| (p - a) * (p - a))
        .sum();
    Ok(sum / pred.len() as f64)
}

/// `out += scale * d mse / d pred`, where the mean runs over `count` elements.
#[inline]
pub fn mse_grad_into(pred: &[f64], actual: &[f64], count: usize, scale: f64, out: &mut [f64]) {
    let k = 2.0 * scale / count as f64;
    for ((o, p), a) in out.iter_mut().zip(pred).zip(actual) {
        *o += k * (p - a);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let a = Matrix::from_rows(&[[3.0, 4.0]]).unwrap();
        let z = Matrix::zeros(1, 2);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        assert_eq!(mse(&a, &z).unwrap(), 12.5);
        assert_eq!(mse_slices(&[1.0], &[0.0]).unwrap(), 1.0);
        assert!(mse(&a, &Matrix::zeros(2, 1)).is_err());
    }
}
