//! Forecast evaluation metrics with zero-actual masking.
//!
//! All functions take `pred` and `actual` as equally shaped matrices
//! (rows are time steps, columns are series) holding denormalized values.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};

use crate::data::pearson;
use crate::error::{Error, Result};
use crate::math;
use crate::nn::Matrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Metric {
    Mae,
    Rmse,
    Rrse,
    Mape,
    Smape,
    R2,
    Corr,
    Pnbi,
    Opnbi,
}

impl Metric {
    pub const ALL: [Metric; 9] = [
        Metric::Mae,
        Metric::Rmse,
        Metric::Rrse,
        Metric::Mape,
        Metric::Smape,
        Metric::R2,
        Metric::Corr,
        Metric::Pnbi,
        Metric::Opnbi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::Mae => "mae",
            Metric::Rmse => "rmse",
            Metric::Rrse => "rrse",
            Metric::Mape => "mape",
            Metric::Smape => "smape",
            Metric::R2 => "r2",
            Metric::Corr => "corr",
            Metric::Pnbi => "pnbi",
            Metric::Opnbi => "opnbi",
        }
    }

    fn bit(self) -> u16 {
        1 << self as u16
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Metrics that skip points whose actual value is zero.
///
/// MAPE and oPNBI divide by the actual value and are always masked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MaskPolicy {
    bits: u16,
}

impl MaskPolicy {
    const ALWAYS: u16 = 1 << Metric::Mape as u16 | 1 << Metric::Opnbi as u16;

    /// Zero demand is a legitimate observation.
    pub fn demand() -> Self {
        MaskPolicy { bits: Self::ALWAYS }
    }

    /// Zero readings are anomalies, so absolute errors and PNBI skip them too.
    pub fn speed() -> Self {
        Self::demand()
            .with(Metric::Mae)
            .with(Metric::Rmse)
            .with(Metric::Pnbi)
    }

    pub fn with(mut self, m: Metric) -> Self {
        self.bits |= m.bit();
        self
    }

    pub fn masks(&self, m: Metric) -> bool {
        self.bits & m.bit() != 0
    }

    pub fn masked_metrics(&self) -> impl Iterator<Item = Metric> + '_ {
        Metric::ALL.into_iter().filter(|m| self.masks(*m))
    }
}

impl Default for MaskPolicy {
    fn default() -> Self {
        Self::demand()
    }
}

/// A metric value together with how many points were excluded.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricValue {
    pub value: Result<f64>,
    pub masked: usize,
}

impl MetricValue {
    pub fn get(&self) -> Option<f64> {
        self.value.as_ref().ok().copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointErrors {
    pub mae: MetricValue,
    pub rmse: MetricValue,
    pub mape: MetricValue,
    pub smape: MetricValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RelativeMetrics {
    pub rrse: Result<f64>,
    pub r2: Result<f64>,
    pub corr: Result<f64>,
    /// Series left out of CORR because one side is constant.
    pub corr_skipped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiasMetrics {
    pub pnbi: MetricValue,
    pub opnbi: MetricValue,
}

fn check(pred: &Matrix, actual: &Matrix) -> Result<()> {
    if pred.shape() != actual.shape() {
        return Err(Error::dim(
            "metrics",
            format!(
                "pred is {}x{} but actual is {}x{}",
                pred.rows(),
                pred.cols(),
                actual.rows(),
                actual.cols()
            ),
        ));
    }
    if !pred.is_finite() || !actual.is_finite() {
        return Err(Error::NonFinite("metric evaluation".into()));
    }
    Ok(())
}

/// Mean of `term` over points not rejected by `skip`.
fn masked_mean(
    pred: &Matrix,
    actual: &Matrix,
    metric: Metric,
    skip: impl Fn(f64, f64) -> bool,
    term: impl Fn(f64, f64) -> f64,
) -> MetricValue {
    let mut sum = 0.0;
    let mut used = 0usize;
    for (&p, &a) in pred.as_slice().iter().zip(actual.as_slice()) {
        if skip(p, a) {
            continue;
        }
        sum += term(p, a);
        used += 1;
    }
    let masked = pred.len() - used;
    let value = if used == 0 {
        Err(Error::EmptyEvaluation(metric.name()))
    } else {
        Ok(sum / used as f64)
    };
    MetricValue { value, masked }
}

fn zero_mask(policy: &MaskPolicy, m: Metric) -> impl Fn(f64, f64) -> bool {
    let on = policy.masks(m);
    move |_, a| on && a == 0.0
}

pub fn point_error_metrics(pred: &Matrix, actual: &Matrix, policy: &MaskPolicy) -> Result<PointErrors> {
    check(pred, actual)?;
    let mae = masked_mean(pred, actual, Metric::Mae, zero_mask(policy, Metric::Mae), |p, a| {
        libm::fabs(p - a)
    });
    let mut rmse = masked_mean(pred, actual, Metric::Rmse, zero_mask(policy, Metric::Rmse), |p, a| {
        (p - a) * (p - a)
    });
    rmse.value = rmse.value.map(math::sqrt);
    let mape = masked_mean(pred, actual, Metric::Mape, |_, a| a == 0.0, |p, a| {
        libm::fabs((p - a) / a)
    });
    let smape_zero = zero_mask(policy, Metric::Smape);
    let smape = masked_mean(
        pred,
        actual,
        Metric::Smape,
        |p, a| smape_zero(p, a) || (p == 0.0 && a == 0.0),
        |p, a| libm::fabs(p - a) / (libm::fabs(p) + libm::fabs(a)),
    );
    Ok(PointErrors { mae, rmse, mape, smape })
}

pub fn relative_metrics(pred: &Matrix, actual: &Matrix) -> Result<RelativeMetrics> {
    check(pred, actual)?;
    let n = actual.len();
    let (rrse, r2) = if n == 0 {
        (Err(Error::EmptyEvaluation("rrse")), Err(Error::EmptyEvaluation("r2")))
    } else {
        let mean = actual.as_slice().iter().sum::<f64>() / n as f64;
        let mut sse = 0.0;
        let mut sst = 0.0;
        for (&p, &a) in pred.as_slice().iter().zip(actual.as_slice()) {
            sse += (p - a) * (p - a);
            sst += (a - mean) * (a - mean);
        }
        if sst == 0.0 {
            (Err(Error::UndefinedMetric("rrse")), Err(Error::UndefinedMetric("r2")))
        } else {
            (Ok(math::sqrt(sse) / math::sqrt(sst)), Ok(1.0 - sse / sst))
        }
    };

    let mut total = 0.0;
    let mut used = 0usize;
    for j in 0..actual.cols() {
        if let Some(r) = pearson(&actual.column_values(j), &pred.column_values(j))? {
            total += r;
            used += 1;
        }
    }
    let corr = if used == 0 {
        Err(Error::UndefinedMetric("corr"))
    } else {
        Ok(total / used as f64)
    };
    Ok(RelativeMetrics {
        rrse,
        r2,
        corr,
        corr_skipped: actual.cols() - used,
    })
}

pub fn bias_metrics(pred: &Matrix, actual: &Matrix, policy: &MaskPolicy) -> Result<BiasMetrics> {
    check(pred, actual)?;
    let pnbi = masked_mean(pred, actual, Metric::Pnbi, zero_mask(policy, Metric::Pnbi), |p, a| {
        if p - a > 0.0 {
            1.0
        } else {
            0.0
        }
    });
    let opnbi = masked_mean(pred, actual, Metric::Opnbi, |_, a| a == 0.0, |p, a| {
        (p + a) / (2.0 * a)
    });
    Ok(BiasMetrics { pnbi, opnbi })
}

/// Relative improvement of `candidate` over `reference` in percent; positive is better.
pub fn improvement_pct(candidate: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) || !candidate.is_finite() || !reference.is_finite() {
        return Err(Error::Config(format!(
            "improvement needs a positive reference, got {reference}"
        )));
    }
    Ok((reference - candidate) / reference * 100.0)
}

/// The full metric suite for one evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricReport {
    pub policy: MaskPolicy,
    pub points: usize,
    pub values: Vec<(Metric, MetricValue)>,
    pub corr_skipped: usize,
}

impl MetricReport {
    pub fn evaluate(pred: &Matrix, actual: &Matrix, policy: &MaskPolicy) -> Result<Self> {
        let pe = point_error_metrics(pred, actual, policy)?;
        let rel = relative_metrics(pred, actual)?;
        let bias = bias_metrics(pred, actual, policy)?;
        let whole = |value| MetricValue { value, masked: 0 };
        let values = alloc::vec![
            (Metric::Mae, pe.mae),
            (Metric::Rmse, pe.rmse),
            (Metric::Rrse, whole(rel.rrse)),
            (Metric::Mape, pe.mape),
            (Metric::Smape, pe.smape),
            (Metric::R2, whole(rel.r2)),
            (Metric::Corr, whole(rel.corr)),
            (Metric::Pnbi, bias.pnbi),
            (Metric::Opnbi, bias.opnbi),
        ];
        Ok(MetricReport {
            policy: *policy,
            points: pred.len(),
            values,
            corr_skipped: rel.corr_skipped,
        })
    }

    pub fn entry(&self, m: Metric) -> &MetricValue {
        &self.values.iter().find(|(k, _)| *k == m).expect("every metric is present").1
    }

    pub fn get(&self, m: Metric) -> Option<f64> {
        self.entry(m).get()
    }

    pub fn mae(&self) -> Option<f64> {
        self.get(Metric::Mae)
    }

    /// Flat `key=value` lines. Undefined metrics are written as `nan`
    /// with the error class under `<metric>.error`.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "points={}", self.points);
        let masked: Vec<&str> = self.policy.masked_metrics().map(Metric::name).collect();
        let _ = writeln!(s, "mask_zero_actuals={}", masked.join(","));
        for (m, v) in &self.values {
            match &v.value {
                Ok(x) => {
                    let _ = writeln!(s, "{m}={x}");
                }
                Err(e) => {
                    let _ = writeln!(s, "{m}=nan");
                    let _ = writeln!(s, "{m}.error={}", e.class());
                }
            }
            if v.masked > 0 {
                let _ = writeln!(s, "{m}.masked={}", v.masked);
            }
        }
        let _ = writeln!(s, "corr.skipped_series={}", self.corr_skipped);
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: &[f64]) -> Matrix {
        Matrix::from_rows(&[v]).unwrap()
    }

    #[test]
    fn perfect_prediction() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [3.0, 5.0], [2.0, 1.0]]).unwrap();
        let r = MetricReport::evaluate(&a, &a, &MaskPolicy::demand()).unwrap();
        for m in [Metric::Mae, Metric::Rmse, Metric::Mape, Metric::Smape, Metric::Rrse, Metric::Pnbi] {
            assert_eq!(r.get(m), Some(0.0), "{m}");
        }
        assert_eq!(r.get(Metric::R2), Some(1.0));
        assert!((r.get(Metric::Corr).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(r.get(Metric::Opnbi), Some(1.0));
    }

    #[test]
    fn zero_actuals_under_demand_policy() {
        let pe = point_error_metrics(&row(&[3.0, 4.0]), &row(&[0.0, 0.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(pe.mae.get(), Some(3.5));
        assert!((pe.rmse.get().unwrap() - 3.5355339059327378).abs() < 1e-12);
        assert_eq!(pe.mape.value, Err(Error::EmptyEvaluation("mape")));
        assert_eq!(pe.mape.masked, 2);
    }

    #[test]
    fn mape_masks_zero_actual() {
        let pe = point_error_metrics(&row(&[1.0, 3.0]), &row(&[0.0, 2.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(pe.mape.get(), Some(0.5));
        assert_eq!(pe.mape.masked, 1);
    }

    #[test]
    fn speed_policy_masks_absolute_errors() {
        let pe = point_error_metrics(&row(&[1.0, 3.0]), &row(&[0.0, 2.0]), &MaskPolicy::speed()).unwrap();
        assert_eq!(pe.mae.get(), Some(1.0));
        assert_eq!(pe.mae.masked, 1);
    }

    #[test]
    fn smape_masks_double_zero() {
        let pe = point_error_metrics(&row(&[0.0, 1.0]), &row(&[0.0, 3.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(pe.smape.get(), Some(0.5));
        assert_eq!(pe.smape.masked, 1);
    }

    #[test]
    fn predicting_the_mean() {
        let a = Matrix::from_rows(&[[1.0, 3.0], [5.0, 7.0]]).unwrap();
        let p = Matrix::from_rows(&[[4.0, 4.0], [4.0, 4.0]]).unwrap();
        let r = relative_metrics(&p, &a).unwrap();
        assert_eq!(r.rrse, Ok(1.0));
        assert_eq!(r.r2, Ok(0.0));
        assert_eq!(r.corr, Err(Error::UndefinedMetric("corr")));
        assert_eq!(r.corr_skipped, 2);
    }

    #[test]
    fn constant_actual_is_undefined() {
        let a = row(&[2.0, 2.0, 2.0]);
        let r = relative_metrics(&row(&[1.0, 2.0, 3.0]), &a).unwrap();
        assert_eq!(r.rrse.unwrap_err().class(), "undefined-metric");
        assert_eq!(r.r2.unwrap_err().class(), "undefined-metric");
    }

    #[test]
    fn bias_examples() {
        let b = bias_metrics(&row(&[2.0, 1.0]), &row(&[1.0, 2.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(b.pnbi.get(), Some(0.5));
        let b = bias_metrics(&row(&[3.0]), &row(&[1.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(b.opnbi.get(), Some(2.0));
        let b = bias_metrics(&row(&[3.0]), &row(&[0.0]), &MaskPolicy::demand()).unwrap();
        assert_eq!(b.opnbi.value.unwrap_err().class(), "empty-evaluation");
        assert_eq!(b.pnbi.get(), Some(1.0));
    }

    #[test]
    fn improvement_examples() {
        assert!((improvement_pct(7.777, 8.750).unwrap() - 11.12).abs() < 0.01);
        assert_eq!(improvement_pct(8.75, 8.75).unwrap(), 0.0);
        assert!((improvement_pct(8.780, 8.750).unwrap() + 0.34).abs() < 0.01);
        assert_eq!(improvement_pct(1.0, 0.0).unwrap_err().class(), "config");
    }

    #[test]
    fn shape_mismatch() {
        let err = point_error_metrics(&row(&[1.0]), &row(&[1.0, 2.0]), &MaskPolicy::demand()).unwrap_err();
        assert_eq!(err.class(), "dimension");
    }

    #[test]
    fn kv_report_lists_every_metric() {
        let r = MetricReport::evaluate(&row(&[3.0, 4.0]), &row(&[0.0, 1.0]), &MaskPolicy::demand()).unwrap();
        let kv = r.to_kv();
        for m in Metric::ALL {
            assert!(kv.contains(&format!("\n{m}=")), "{m} missing from {kv}");
        }
        assert!(kv.contains("mape.masked=1"));
    }
}
