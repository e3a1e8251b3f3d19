//! Double-double arithmetic: an unevaluated sum `hi + lo` carrying about 106
//! bits of significand.

use core::ops::{Add, Div, Mul, Neg, Sub};

use crate::nn::LossValue;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dd {
    pub hi: f64,
    pub lo: f64,
}

const LN2: Dd = Dd {
    hi: core::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, libm::fma(a, b, -p))
}

impl Dd {
    pub const ZERO: Dd = Dd { hi: 0.0, lo: 0.0 };
    pub const ONE: Dd = Dd { hi: 1.0, lo: 0.0 };

    pub fn new(x: f64) -> Dd {
        Dd { hi: x, lo: 0.0 }
    }

    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    /// Multiplication by `2^k`, exact barring overflow.
    pub fn ldexp(self, k: i32) -> Dd {
        Dd {
            hi: libm::scalbn(self.hi, k),
            lo: libm::scalbn(self.lo, k),
        }
    }

    pub fn exp(self) -> Dd {
        if self.hi > 709.0 {
            return Dd::new(f64::INFINITY);
        }
        if self.hi < -745.0 {
            return Dd::ZERO;
        }
        // x = k ln2 + r, then exp(r) = exp(r / 16)^16. Few squarings keep the
        // rounding error from being amplified.
        let k = libm::round(self.hi / LN2.hi);
        let r = (self - LN2 * Dd::new(k)).ldexp(-4);
        let mut sum = Dd::ONE;
        let mut term = Dd::ONE;
        for n in 1..=14 {
            term = term * r / Dd::new(n as f64);
            sum = sum + term;
        }
        for _ in 0..4 {
            sum = sum * sum;
        }
        sum.ldexp(k as i32)
    }

    pub fn tanh(self) -> Dd {
        let a = if self.hi < 0.0 { -self } else { self };
        let t = if a.hi > 40.0 {
            Dd::ONE - (-(a + a)).exp().ldexp(1)
        } else {
            let e = (a + a).exp();
            (e - Dd::ONE) / (e + Dd::ONE)
        };
        if self.hi < 0.0 {
            -t
        } else {
            t
        }
    }

    pub fn sigmoid(self) -> Dd {
        Dd::ONE / (Dd::ONE + (-self).exp())
    }
}

impl From<f64> for Dd {
    fn from(x: f64) -> Dd {
        Dd::new(x)
    }
}

impl Neg for Dd {
    type Output = Dd;
    fn neg(self) -> Dd {
        Dd {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Dd {
    type Output = Dd;
    fn add(self, b: Dd) -> Dd {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Dd { hi, lo }
    }
}

impl Sub for Dd {
    type Output = Dd;
    fn sub(self, b: Dd) -> Dd {
        self + (-b)
    }
}

impl Mul for Dd {
    type Output = Dd;
    fn mul(self, b: Dd) -> Dd {
        let (p, e) = two_prod(self.hi, b.hi);
        let (hi, lo) = quick_two_sum(p, e + (self.hi * b.lo + self.lo * b.hi));
        Dd { hi, lo }
    }
}

impl Div for Dd {
    type Output = Dd;
    fn div(self, b: Dd) -> Dd {
        let q1 = self.hi / b.hi;
        let r = self - b * Dd::new(q1);
        let q2 = r.hi / b.hi;
        let r = r - b * Dd::new(q2);
        let q3 = r.hi / b.hi;
        let (hi, lo) = quick_two_sum(q1, q2);
        Dd { hi, lo } + Dd::new(q3)
    }
}

impl LossValue for Dd {
    fn central_difference(plus: Dd, minus: Dd, h: f64) -> f64 {
        (plus - minus).to_f64() / (2.0 * h)
    }

    fn is_finite(&self) -> bool {
        Dd::is_finite(*self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: Dd, b: f64, tol: f64) -> bool {
        (a.to_f64() - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn arithmetic_keeps_low_bits() {
        let a = Dd::new(1.0) + Dd::new(1e-20);
        assert_eq!(a.hi, 1.0);
        assert_eq!(a.lo, 1e-20);
        assert_eq!((a - Dd::ONE).to_f64(), 1e-20);
        let third = Dd::ONE / Dd::new(3.0);
        let back = third * Dd::new(3.0) - Dd::ONE;
        assert!(back.to_f64().abs() < 1e-31);
    }

    #[test]
    fn transcendentals_match_libm() {
        for &x in &[-30.0, -3.5, -1.0, -1e-3, 0.0, 1e-8, 0.25, 1.0, 2.0, 17.0, 50.0] {
            assert!(close(Dd::new(x).exp(), libm::exp(x), 1e-15), "exp {x}");
            assert!(close(Dd::new(x).tanh(), libm::tanh(x), 1e-15), "tanh {x}");
            assert!(close(Dd::new(x).sigmoid(), 1.0 / (1.0 + libm::exp(-x)), 1e-15), "sigmoid {x}");
        }
    }

    #[test]
    fn exp_of_one_has_full_precision() {
        // e = 2.718281828459045 + 1.4456468917292502e-16
        let e = Dd::ONE.exp();
        assert_eq!(e.hi, core::f64::consts::E);
        assert!((e.lo - 1.445_646_891_729_250_2e-16).abs() < 1e-30);
    }

    #[test]
    fn exp_is_multiplicative() {
        let a = Dd::new(0.7).exp() * Dd::new(1.3).exp();
        let b = Dd::new(2.0).exp();
        assert!((a - b).to_f64().abs() < 1e-29);
    }
}
