use std::fs;
use std::path::Path;

use ukadf_core::train::{RunResult, SweepResult};

use crate::artifact_io::write_atomic;
use crate::csv_io::write_table;
use crate::{Error, Result};

pub const REPORT_FILE: &str = "report.txt";
pub const TRACE_FILE: &str = "trace.csv";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const ACTUALS_FILE: &str = "actuals.csv";
pub const SWEEP_FILE: &str = "sweep.csv";

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes the report, loss trace and test forecasts of a run into `dir`.
pub fn write_run(dir: &Path, result: &RunResult) -> Result<()> {
    ensure_dir(dir)?;
    write_atomic(&dir.join(REPORT_FILE), result.to_kv().as_bytes())?;
    write_atomic(&dir.join(TRACE_FILE), result.trace_csv().as_bytes())?;
    for (name, values) in [(PREDICTIONS_FILE, &result.test_predictions), (ACTUALS_FILE, &result.test_actuals)] {
        let mut buf = Vec::new();
        write_table(&mut buf, &result.station_ids, None, values)?;
        write_atomic(&dir.join(name), &buf)?;
    }
    Ok(())
}

pub fn write_trace(path: &Path, result: &RunResult) -> Result<()> {
    write_atomic(path, result.trace_csv().as_bytes())
}

/// Grid as CSV: one row per cell in grid order.
pub fn sweep_csv(s: &SweepResult) -> String {
    let mut out = String::from("gamma,beta,seed,best_epoch,val_loss,test_mae,test_rmse,test_mape\n");
    for p in &s.points {
        let r = &p.result;
        let get = |m| r.report.get(m).map_or("nan".to_string(), |v: f64| v.to_string());
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            p.gamma,
            p.beta,
            p.seed,
            r.best_epoch.unwrap_or(0),
            r.best_val_loss.unwrap_or(f64::NAN),
            get(ukadf_core::metrics::Metric::Mae),
            get(ukadf_core::metrics::Metric::Rmse),
            get(ukadf_core::metrics::Metric::Mape),
        ));
    }
    out
}

/// Selection and stability summary as `key=value` lines.
pub fn sweep_summary(s: &SweepResult) -> String {
    let best = s.best_point();
    format!(
        "runs={}\nbest.gamma={}\nbest.beta={}\nbest.seed={}\nbest.val_loss={}\nbest.test_mae={}\ntest_mae.median={}\ntest_mae.std={}\n",
        s.points.len(),
        best.gamma,
        best.beta,
        best.seed,
        best.result.best_val_loss.unwrap_or(f64::NAN),
        best.result.test_mae(),
        s.median_mae(),
        s.mae_std
    )
}

pub fn write_sweep(dir: &Path, s: &SweepResult) -> Result<()> {
    ensure_dir(dir)?;
    write_atomic(&dir.join(SWEEP_FILE), sweep_csv(s).as_bytes())?;
    write_atomic(&dir.join(REPORT_FILE), sweep_summary(s).as_bytes())
}
