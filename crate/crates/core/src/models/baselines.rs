use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::data::{DemandMatrix, WindowBatch};
use crate::error::{Error, Result};
use crate::nn::Matrix;

const STEPS_PER_DAY: usize = 24;

/// Mean demand per station and hour of day over the training rows.
/// Hours never seen in training fall back to the station mean.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoricalAverage {
    hourly: Vec<[Option<f64>; STEPS_PER_DAY]>,
    station_mean: Vec<f64>,
}

impl HistoricalAverage {
    pub fn fit(train: &DemandMatrix) -> Self {
        let n = train.stations();
        let mut sums = vec![[0.0f64; STEPS_PER_DAY]; n];
        let mut counts = [0usize; STEPS_PER_DAY];
        let mut totals = vec![0.0f64; n];
        for r in 0..train.steps() {
            let hour = (train.first_step() + r) % STEPS_PER_DAY;
            counts[hour] += 1;
            for (i, &v) in train.values().row(r).iter().enumerate() {
                sums[i][hour] += v;
                totals[i] += v;
            }
        }
        let steps = train.steps().max(1) as f64;
        HistoricalAverage {
            hourly: sums
                .iter()
                .map(|s| core::array::from_fn(|h| (counts[h] > 0).then(|| s[h] / counts[h] as f64)))
                .collect(),
            station_mean: totals.iter().map(|t| t / steps).collect(),
        }
    }

    /// Forecast for `station` at absolute time index `step`.
    pub fn predict(&self, station: usize, step: usize) -> f64 {
        self.hourly[station][step % STEPS_PER_DAY].unwrap_or(self.station_mean[station])
    }
}

/// `query_times.len() x N` forecasts at absolute time indices.
pub fn ha_forecast(train: &DemandMatrix, query_times: &[usize]) -> Matrix {
    let ha = HistoricalAverage::fit(train);
    let n = train.stations();
    let mut out = Matrix::zeros(query_times.len(), n);
    for (r, &t) in query_times.iter().enumerate() {
        for i in 0..n {
            out.set(r, i, ha.predict(i, t));
        }
    }
    out
}

/// Ridge added to the normal equations.
pub const LR_RIDGE: f64 = 1e-8;

/// Per-station linear autoregression: next value from the station's own
/// `tau` lags plus an intercept, fitted by least squares on the normal
/// equations with a small ridge.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearAutoregression {
    tau: usize,
    /// Per station: `tau` lag coefficients (oldest first), then the intercept.
    coefficients: Vec<Vec<f64>>,
}

impl LinearAutoregression {
    pub fn fit(train: &WindowBatch) -> Result<Self> {
        let tau = train.tau();
        let n = train.stations();
        let p = tau + 1;
        let mut coefficients = Vec::with_capacity(n);
        let mut features = vec![0.0; p];
        for i in 0..n {
            let mut gram = vec![0.0; p * p];
            let mut rhs = vec![0.0; p];
            for k in 0..train.len() {
                let inputs = train.inputs(k);
                for t in 0..tau {
                    features[t] = inputs[t * n + i];
                }
                features[tau] = 1.0;
                let y = train.series().get(train.final_target_row(k), i);
                for a in 0..p {
                    rhs[a] += features[a] * y;
                    for b in 0..p {
                        gram[a * p + b] += features[a] * features[b];
                    }
                }
            }
            for a in 0..p {
                gram[a * p + a] += LR_RIDGE;
            }
            coefficients.push(solve_spd(&mut gram, &mut rhs, p).ok_or_else(|| {
                Error::Numerical(format!("least-squares system for station {i} is singular"))
            })?);
        }
        Ok(LinearAutoregression { tau, coefficients })
    }

    pub fn coefficients(&self, station: usize) -> &[f64] {
        &self.coefficients[station]
    }

    /// Next-step forecast for every station from a `tau x N` window.
    pub fn predict(&self, inputs: &[f64]) -> Vec<f64> {
        let n = self.coefficients.len();
        (0..n)
            .map(|i| {
                let c = &self.coefficients[i];
                let lags: f64 = (0..self.tau).map(|t| c[t] * inputs[t * n + i]).sum();
                lags + c[self.tau]
            })
            .collect()
    }
}

/// Fits on `train` and forecasts the final step of every window of `eval`
/// (`eval.len() x N`).
pub fn lr_fit_forecast(train: &WindowBatch, eval: &WindowBatch) -> Result<Matrix> {
    if train.tau() != eval.tau() || train.stations() != eval.stations() {
        return Err(Error::dim("lr_fit_forecast", "train and evaluation windows differ in shape"));
    }
    let model = LinearAutoregression::fit(train)?;
    let n = eval.stations();
    let mut out = Matrix::zeros(eval.len(), n);
    for k in 0..eval.len() {
        out.row_mut(k).copy_from_slice(&model.predict(eval.inputs(k)));
    }
    Ok(out)
}

/// Cholesky solve of a symmetric positive definite `p x p` system, in place.
fn solve_spd(a: &mut [f64], b: &mut [f64], p: usize) -> Option<Vec<f64>> {
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !(d > 0.0) {
            return None;
        }
        let d = crate::math::sqrt(d);
        a[j * p + j] = d;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / d;
        }
    }
    // L y = b
    for i in 0..p {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * p + k] * b[k];
        }
        b[i] = s / a[i * p + i];
    }
    // L^T x = y
    for i in (0..p).rev() {
        let mut s = b[i];
        for k in i + 1..p {
            s -= a[k * p + i] * b[k];
        }
        b[i] = s / a[i * p + i];
    }
    Some(b.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dm(rows: &[[f64; 1]]) -> DemandMatrix {
        DemandMatrix::from_values(Matrix::from_rows(rows).unwrap()).unwrap()
    }

    #[test]
    fn ha_hour_average_and_fallback() {
        // 34 rows: hour 9 appears at rows 9 and 33
        let mut rows = vec![[1.0]; 34];
        rows[9] = [2.0];
        rows[33] = [4.0];
        let train = dm(&rows);
        let out = ha_forecast(&train, &[9, 33, 57]);
        assert_eq!(out.as_slice(), &[3.0, 3.0, 3.0]);

        // only hours 0..5 seen: hour 12 falls back to the station mean
        let train = dm(&[[1.0], [2.0], [3.0], [4.0], [5.0], [6.0]]);
        assert_eq!(ha_forecast(&train, &[12]).as_slice(), &[3.5]);
    }

    #[test]
    fn ha_constant_series() {
        let train = dm(&[[7.0]; 50]);
        let out = ha_forecast(&train, &(50..80).collect::<Vec<_>>());
        assert!(out.as_slice().iter().all(|&v| v == 7.0));
    }

    #[test]
    fn lr_recovers_ar1() {
        let series: Vec<f64> = (0..20).map(|t| 1000.0 * libm::pow(0.5, t as f64)).collect();
        let w = WindowBatch::new(Matrix::column(&series), 1).unwrap();
        let model = LinearAutoregression::fit(&w).unwrap();
        assert!((model.coefficients(0)[0] - 0.5).abs() < 1e-6);
        let pred = lr_fit_forecast(&w, &w).unwrap();
        for k in 0..w.len() {
            assert!((pred.get(k, 0) - series[k + 1]).abs() < 1e-6);
        }
    }

    #[test]
    fn lr_constant_series() {
        let w = WindowBatch::new(Matrix::column(&[4.0; 30]), 3).unwrap();
        let pred = lr_fit_forecast(&w, &w).unwrap();
        assert!(pred.as_slice().iter().all(|v| (v - 4.0).abs() < 1e-6));
    }
}
