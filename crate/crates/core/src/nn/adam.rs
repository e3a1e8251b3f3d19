use super::Param;
use crate::math::sqrt;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamConfig {
    pub fn with_lr(lr: f64) -> Self {
        AdamConfig {
            lr,
            ..Self::default()
        }
    }
}

impl Default for AdamConfig {
    fn default() -> Self {
        AdamConfig {
            lr: 1e-4,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// Adam with a step counter; the moments live on each [`Param`].
#[derive(Debug, Clone)]
pub struct Adam {
    cfg: AdamConfig,
    t: u64,
}

impl Adam {
    pub fn new(cfg: AdamConfig) -> Self {
        Adam { cfg, t: 0 }
    }

    pub fn steps(&self) -> u64 {
        self.t
    }

    pub fn step<'a>(&mut self, params: impl IntoIterator<Item = &'a mut Param>) {
        self.t += 1;
        adam_step(
            params,
            self.cfg.lr,
            self.cfg.beta1,
            self.cfg.beta2,
            self.cfg.eps,
            self.t,
        );
    }
}

/// One bias-corrected Adam update at step `t >= 1`. Frozen parameters are
/// skipped entirely.
pub fn adam_step<'a>(
    params: impl IntoIterator<Item = &'a mut Param>,
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    t: u64,
) {
    debug_assert!(t >= 1);
    let c1 = 1.0 - libm::pow(beta1, t as f64);
    let c2 = 1.0 - libm::pow(beta2, t as f64);
    for p in params {
        if p.is_frozen() {
            continue;
        }
        let Param {
            value,
            grad,
            moment1,
            moment2,
            ..
        } = p;
        let values = value.as_mut_slice();
        for (k, &g) in grad.as_slice().iter().enumerate() {
            moment1[k] = beta1 * moment1[k] + (1.0 - beta1) * g;
            moment2[k] = beta2 * moment2[k] + (1.0 - beta2) * g * g;
            let m_hat = moment1[k] / c1;
            let v_hat = moment2[k] / c2;
            values[k] -= lr * m_hat / (sqrt(v_hat) + eps);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;

    fn scalar(v: f64, g: f64) -> Param {
        let mut p = Param::new("p", Matrix::column(&[v]));
        p.grad_mut().as_mut_slice()[0] = g;
        p
    }

    #[test]
    fn first_step_closed_form() {
        let mut p = scalar(0.0, 1.0);
        adam_step([&mut p], 1e-4, 0.9, 0.999, 1e-8, 1);
        let expected = -1e-4 / (1.0 + 1e-8);
        assert!((p.value().get(0, 0) - expected).abs() < 1e-18);
    }

    #[test]
    fn zero_gradient_is_a_no_op() {
        let mut p = scalar(0.25, 0.0);
        Adam::new(AdamConfig::default()).step([&mut p]);
        assert_eq!(p.value().get(0, 0), 0.25);
    }

    #[test]
    fn frozen_value_is_bitwise_unchanged() {
        let mut p = Param::frozen("p", Matrix::column(&[0.1, -3.5]));
        p.grad_mut().fill(7.0);
        let before = p.value().clone();
        let mut opt = Adam::new(AdamConfig::with_lr(0.5));
        for _ in 0..10 {
            opt.step([&mut p]);
        }
        let same = before
            .as_slice()
            .iter()
            .zip(p.value().as_slice())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        assert!(same);
    }
}
