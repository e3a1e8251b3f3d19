use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use core::f64::consts::PI;
use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal};

use super::DemandMatrix;
use crate::error::{Error, Result};
use crate::math::{round, sin, sqrt};
use crate::nn::Matrix;
use crate::rng;

/// Stationary standard deviation of the idiosyncratic AR(1) component.
const IDIOSYNCRATIC_STD: f64 = 0.5;

/// Synthetic multimodal demand.
///
/// Station `i` of every mode follows
/// `max(0, round(scale * (share * a_i * s(t) + (1 - share) * u_i(t)) + noise))`
/// where `s(t) = 1 + sin(2πt/24) * (1 + 0.2 sin(2πt/168))` is a daily/weekly
/// factor shared by all modes, `a_i ~ U[0.5, 1.5]` a station loading and
/// `u_i(t) = 1 + z_i(t)` with `z_i` a stationary AR(1) process of coefficient
/// `ar_coefficient` and standard deviation 0.5.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub mode_station_counts: Vec<usize>,
    pub total_steps: usize,
    pub share: f64,
    pub ar_coefficient: f64,
    pub noise_std: f64,
    pub scale: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            mode_station_counts: vec![8, 6],
            total_steps: 2184,
            share: 0.9,
            ar_coefficient: 0.5,
            noise_std: 2.0,
            scale: 50.0,
            seed: 7,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.share) {
            return Err(Error::Config(format!("share must be in [0, 1], got {}", self.share)));
        }
        if !(0.0..1.0).contains(&self.ar_coefficient) {
            return Err(Error::Config(format!(
                "AR coefficient must be in [0, 1), got {}",
                self.ar_coefficient
            )));
        }
        if self.total_steps < 48 {
            return Err(Error::Config(format!(
                "need at least 48 steps, got {}",
                self.total_steps
            )));
        }
        if self.mode_station_counts.is_empty() || self.mode_station_counts.contains(&0) {
            return Err(Error::Config("every mode needs at least one station".into()));
        }
        if !(self.noise_std >= 0.0 && self.noise_std.is_finite()) {
            return Err(Error::Config(format!("noise std must be >= 0, got {}", self.noise_std)));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            return Err(Error::Config(format!("scale must be > 0, got {}", self.scale)));
        }
        Ok(())
    }
}

/// Shared daily / weekly factor.
pub fn shared_factor(t: usize) -> f64 {
    let t = t as f64;
    1.0 + sin(2.0 * PI * t / 24.0) * (1.0 + 0.2 * sin(2.0 * PI * t / 168.0))
}

/// One demand matrix per mode; deterministic in `cfg`.
pub fn synth_generate(cfg: &SynthConfig) -> Result<Vec<DemandMatrix>> {
    cfg.validate()?;
    let t_len = cfg.total_steps;
    let s: Vec<f64> = (0..t_len).map(shared_factor).collect();
    let innovation = sqrt(1.0 - cfg.ar_coefficient * cfg.ar_coefficient) * IDIOSYNCRATIC_STD;
    let mut out = Vec::with_capacity(cfg.mode_station_counts.len());
    for (mode, &n) in cfg.mode_station_counts.iter().enumerate() {
        let mut r = rng::stream(cfg.seed, &format!("synth-mode-{mode}"));
        let loadings: Vec<f64> = (0..n).map(|_| r.random_range(0.5..=1.5)).collect();
        let mut values = Matrix::zeros(t_len, n);
        for (i, &a) in loadings.iter().enumerate() {
            let mut z = IDIOSYNCRATIC_STD * normal(&mut r);
            for (t, &st) in s.iter().enumerate() {
                if t > 0 {
                    z = cfg.ar_coefficient * z + innovation * normal(&mut r);
                }
                let u = 1.0 + z;
                let noise = cfg.noise_std * normal(&mut r);
                let level = cfg.scale * (cfg.share * a * st + (1.0 - cfg.share) * u);
                values.set(t, i, round(level + noise).max(0.0));
            }
        }
        let ids = (0..n).map(|i| format!("m{mode}s{i}")).collect();
        out.push(DemandMatrix::new(ids, None, values)?);
    }
    Ok(out)
}

fn normal(r: &mut rng::Rng) -> f64 {
    StandardNormal.sample(r)
}
