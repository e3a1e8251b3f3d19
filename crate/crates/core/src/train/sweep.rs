use alloc::format;
use alloc::vec::Vec;

use super::run::run_variant_prepared;
use super::{prepare, Prepared, RunConfig, RunResult};
use crate::artifact::PretrainedArtifact;
use crate::data::DemandMatrix;
use crate::error::{Error, Result};
use crate::math;
use crate::models::VariantKind;

/// Inclusive range `start, start+step, ..` up to `end` (with a small
/// tolerance so `0.1:1.0:0.1` yields ten values). Values are computed as
/// `start + i*step` and rounded to 12 decimals to avoid drift.
pub fn grid_range(start: f64, end: f64, step: f64) -> Result<Vec<f64>> {
    if !(start.is_finite() && end.is_finite() && step.is_finite()) || step <= 0.0 || end < start {
        return Err(Error::Config(format!("invalid range {start}:{end}:{step}")));
    }
    let count = libm::floor((end - start) / step + 1e-9) as usize + 1;
    Ok((0..count)
        .map(|i| math::round((start + i as f64 * step) * 1e12) / 1e12)
        .collect())
}

/// One grid cell.
#[derive(Debug, Clone)]
pub struct SweepPoint {
    pub gamma: f64,
    pub beta: f64,
    pub seed: u64,
    pub result: RunResult,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Row-major over (gamma, beta).
    pub points: Vec<SweepPoint>,
    /// Index of the lowest validation loss (first on ties).
    pub best: usize,
    /// Population standard deviation of test MAE across the grid.
    pub mae_std: f64,
}

impl SweepResult {
    pub fn from_points(points: Vec<SweepPoint>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Config("empty sweep".into()));
        }
        let mut best = 0;
        for (i, p) in points.iter().enumerate() {
            let v = p.result.best_val_loss.unwrap_or(f64::INFINITY);
            if v < points[best].result.best_val_loss.unwrap_or(f64::INFINITY) {
                best = i;
            }
        }
        let maes: Vec<f64> = points.iter().map(|p| p.result.test_mae()).collect();
        let mean = maes.iter().sum::<f64>() / maes.len() as f64;
        let var = maes.iter().map(|m| (m - mean) * (m - mean)).sum::<f64>() / maes.len() as f64;
        Ok(SweepResult {
            points,
            best,
            mae_std: math::sqrt(var),
        })
    }

    pub fn best_point(&self) -> &SweepPoint {
        &self.points[self.best]
    }

    pub fn median_mae(&self) -> f64 {
        let mut maes: Vec<f64> = self.points.iter().map(|p| p.result.test_mae()).collect();
        median(&mut maes)
    }
}

/// Median of `values` (mean of the two middle values for even lengths).
pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// The (gamma, beta, seed) of every grid cell in order.
pub fn sweep_plan(cfg: &RunConfig, gammas: &[f64], betas: &[f64]) -> Result<Vec<(f64, f64, u64)>> {
    if gammas.is_empty() || betas.is_empty() {
        return Err(Error::Config("sweep ranges must be non-empty".into()));
    }
    let mut plan = Vec::with_capacity(gammas.len() * betas.len());
    for &g in gammas {
        for &b in betas {
            plan.push((g, b, cfg.seed.wrapping_add(plan.len() as u64)));
        }
    }
    Ok(plan)
}

/// Runs a single grid cell of the adaptation sweep.
pub fn sweep_point(
    prepared: &Prepared,
    artifact: &PretrainedArtifact,
    cfg: &RunConfig,
    (gamma, beta, seed): (f64, f64, u64),
) -> Result<SweepPoint> {
    let cfg = RunConfig {
        gamma,
        beta,
        seed,
        variant: VariantKind::UnKadf,
        ..cfg.clone()
    };
    let (_, result) = run_variant_prepared(prepared, &cfg, Some(artifact))?;
    Ok(SweepPoint {
        gamma,
        beta,
        seed,
        result,
    })
}

/// Adaptation runs over the full `gammas x betas` grid, one after another.
/// Cell `i` uses seed `cfg.seed + i`.
pub fn sweep(
    data: &DemandMatrix,
    artifact: &PretrainedArtifact,
    cfg: &RunConfig,
    gammas: &[f64],
    betas: &[f64],
) -> Result<SweepResult> {
    let plan = sweep_plan(cfg, gammas, betas)?;
    let prepared = prepare(data, cfg)?;
    let points = plan
        .into_iter()
        .map(|cell| sweep_point(&prepared, artifact, cfg, cell))
        .collect::<Result<Vec<_>>>()?;
    SweepResult::from_points(points)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tenth_steps() {
        let r = grid_range(0.1, 1.0, 0.1).unwrap();
        assert_eq!(r.len(), 10);
        assert_eq!(r[2], 0.3);
        assert_eq!(r[9], 1.0);
        assert_eq!(grid_range(0.5, 0.5, 0.1).unwrap(), [0.5]);
        assert!(grid_range(1.0, 0.1, 0.1).is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
