//! Central finite-difference verification of hand-written backward passes.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::Parameterized;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct ParamCheck {
    pub name: String,
    pub elements: usize,
    pub max_rel_error: f64,
    /// Element index, analytic and finite-difference values at the worst element.
    pub worst: (usize, f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    /// One entry per unfrozen parameter, in the model's parameter order.
    pub params: Vec<ParamCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.params
            .iter()
            .map(|p| p.max_rel_error)
            .fold(0.0, f64::max)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max_rel_error() < tol
    }

    pub fn worst(&self) -> Option<&ParamCheck> {
        self.params
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

/// `|a - f| / max(|a|, |f|, 1e-12)`.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-12)
}

/// Compares the gradients currently stored on `model`'s parameters against
/// `(L(p + h) - L(p - h)) / 2h` for every element of every unfrozen parameter.
///
/// The caller must have populated the analytic gradients for the same point
/// before calling. Values are restored bitwise after each probe.
pub fn grad_check<M, F>(model: &mut M, loss: F, h: f64) -> Result<GradCheckReport>
where
    M: Parameterized,
    F: FnMut(&M) -> Result<f64>,
{
    grad_check_with(model, loss, h)
}

/// A loss value the finite difference can be taken on.
pub trait LossValue: Copy {
    /// `(plus - minus) / 2h`.
    fn central_difference(plus: Self, minus: Self, h: f64) -> f64;
    fn is_finite(&self) -> bool;
}

impl LossValue for f64 {
    fn central_difference(plus: f64, minus: f64, h: f64) -> f64 {
        (plus - minus) / (2.0 * h)
    }

    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
}

/// [`grad_check`] with a loss evaluated in any [`LossValue`] type, so the
/// difference can be taken in more than double precision.
pub fn grad_check_with<M, F, V>(model: &mut M, mut loss: F, h: f64) -> Result<GradCheckReport>
where
    M: Parameterized,
    F: FnMut(&M) -> Result<V>,
    V: LossValue,
{
    let shapes: Vec<(String, usize, bool)> = model
        .params()
        .iter()
        .map(|p| (p.name().to_string(), p.len(), p.is_frozen()))
        .collect();
    let mut report = Vec::new();
    for (pi, (name, len, frozen)) in shapes.into_iter().enumerate() {
        if frozen {
            continue;
        }
        let mut worst = 0.0f64;
        let mut at = (0, 0.0, 0.0);
        for e in 0..len {
            let (orig, analytic) = {
                let p = &model.params()[pi];
                (p.value().as_slice()[e], p.grad().as_slice()[e])
            };
            set(model, pi, e, orig + h);
            let plus = loss(model)?;
            set(model, pi, e, orig - h);
            let minus = loss(model)?;
            set(model, pi, e, orig);
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite(alloc::format!("loss evaluation for {name}[{e}]")));
            }
            let numeric = V::central_difference(plus, minus, h);
            let err = relative_error(analytic, numeric);
            if err > worst || e == 0 {
                worst = worst.max(err);
                at = (e, analytic, numeric);
            }
        }
        report.push(ParamCheck {
            name,
            elements: len,
            max_rel_error: worst,
            worst: at,
        });
    }
    Ok(GradCheckReport { params: report })
}

fn set<M: Parameterized>(model: &mut M, pi: usize, e: usize, v: f64) {
    let mut ps = model.params_mut();
    let value = ps[pi].value_mut().expect("only unfrozen params are probed");
    value.as_mut_slice()[e] = v;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{Matrix, Param};
    use alloc::vec;

    struct Pair {
        live: Param,
        fixed: Param,
    }

    impl Parameterized for Pair {
        fn params(&self) -> Vec<&crate::nn::Param> {
            vec![&self.live, &self.fixed]
        }
        fn params_mut(&mut self) -> Vec<&mut crate::nn::Param> {
            vec![&mut self.live, &mut self.fixed]
        }
    }

    #[test]
    fn quadratic_is_exact() {
        let mut m = Pair {
            live: Param::new("p", Matrix::column(&[3.0])),
            fixed: Param::frozen("q", Matrix::column(&[1.0])),
        };
        m.live.grad_mut().as_mut_slice()[0] = 6.0;
        let report = grad_check(&mut m, |m| Ok(m.live.value().get(0, 0).powi(2)), 1e-5).unwrap();
        assert_eq!(report.params.len(), 1, "frozen params are excluded");
        assert_eq!(report.params[0].name, "p");
        assert!(report.max_rel_error() < 1e-9);
        assert_eq!(m.live.value().get(0, 0), 3.0);
    }

    #[test]
    fn wrong_gradient_is_reported() {
        let mut m = Pair {
            live: Param::new("p", Matrix::column(&[3.0])),
            fixed: Param::frozen("q", Matrix::column(&[1.0])),
        };
        m.live.grad_mut().as_mut_slice()[0] = 5.0;
        let report = grad_check(&mut m, |m| Ok(m.live.value().get(0, 0).powi(2)), 1e-5).unwrap();
        assert!(!report.passes(1e-5));
    }

    #[test]
    fn non_finite_loss_is_an_error() {
        let mut m = Pair {
            live: Param::new("p", Matrix::column(&[3.0])),
            fixed: Param::frozen("q", Matrix::column(&[1.0])),
        };
        let err = grad_check(&mut m, |_| Ok(f64::NAN), 1e-5).unwrap_err();
        assert_eq!(err.class(), "non-finite");
    }
}
