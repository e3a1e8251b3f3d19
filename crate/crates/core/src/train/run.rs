use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;
use core::time::Duration;

use super::fit::{predict_final, train_model, Criterion, EpochRecord, TrainOutcome};
use super::{prepare, Prepared, RunConfig};
use crate::artifact::{ArtifactMetadata, PretrainedArtifact};
use crate::data::DemandMatrix;
use crate::error::{Error, Result};
use crate::metrics::MetricReport;
use crate::models::{
    build_variant, ha_forecast, lr_fit_forecast, PretrainNet, SharingNet, VariantKind, VariantModel, WindowModel,
};
use crate::nn::{LstmCellParams, Matrix};

/// Outcome of one training or fitting run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub variant: VariantKind,
    pub config: RunConfig,
    pub station_ids: Vec<String>,
    /// Empty for the non-neural baselines.
    pub trace: Vec<EpochRecord>,
    pub best_epoch: Option<usize>,
    pub best_val_loss: Option<f64>,
    pub stopped_early: bool,
    /// Epoch boundaries at which the frozen adapter was verified unchanged.
    pub frozen_checks: usize,
    /// Denormalized final-position forecasts, one row per test window.
    pub test_predictions: Matrix,
    pub test_actuals: Matrix,
    pub report: MetricReport,
    /// Filled in by callers that have a clock.
    pub elapsed: Option<Duration>,
}

impl RunResult {
    pub fn test_mae(&self) -> f64 {
        self.report.mae().unwrap_or(f64::NAN)
    }

    /// Mean training loss of the first epoch.
    pub fn initial_loss(&self) -> Option<f64> {
        self.trace.first().map(|r| r.train.total)
    }

    /// Report as `key=value` lines. Wall-clock time is left out so equal
    /// runs give equal reports.
    pub fn to_kv(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.config.echo() {
            let _ = writeln!(s, "config.{k}={v}");
        }
        let _ = writeln!(s, "stations={}", self.station_ids.len());
        let _ = writeln!(s, "epochs_run={}", self.trace.len());
        if let Some(e) = self.best_epoch {
            let _ = writeln!(s, "best_epoch={e}");
        }
        if let Some(v) = self.best_val_loss {
            let _ = writeln!(s, "best_val_loss={v}");
        }
        let _ = writeln!(s, "stopped_early={}", self.stopped_early);
        if self.frozen_checks > 0 {
            let _ = writeln!(s, "frozen_checks={}", self.frozen_checks);
        }
        if let Some(last) = self.trace.last() {
            let _ = writeln!(s, "final_train_loss={}", last.train.total);
        }
        for line in self.report.to_kv().lines() {
            let _ = writeln!(s, "test.{line}");
        }
        s
    }

    /// Loss trace as CSV with header `epoch,total,l1,l2,l3,val_loss`.
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("epoch,total,l1,l2,l3,val_loss\n");
        for r in &self.trace {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.epoch, r.train.total, r.train.prediction, r.train.reconstruction, r.train.alignment, r.val_loss
            );
        }
        s
    }
}

fn finish(
    data: &Prepared,
    cfg: &RunConfig,
    variant: VariantKind,
    test_predictions: Matrix,
    outcome: Option<(Vec<EpochRecord>, usize, f64, bool)>,
    frozen_checks: usize,
) -> Result<RunResult> {
    let test_actuals = data.test_actuals();
    let report = MetricReport::evaluate(&test_predictions, &test_actuals, &cfg.mask)?;
    let (trace, best_epoch, best_val_loss, stopped_early) = match outcome {
        Some((t, e, v, s)) => (t, Some(e), Some(v), s),
        None => (Vec::new(), None, None, false),
    };
    Ok(RunResult {
        variant,
        config: cfg.clone(),
        station_ids: data.station_ids(),
        trace,
        best_epoch,
        best_val_loss,
        stopped_early,
        frozen_checks,
        test_predictions,
        test_actuals,
        report,
        elapsed: None,
    })
}

fn fit_and_finish<M: WindowModel + Clone>(
    model: M,
    data: &Prepared,
    cfg: &RunConfig,
    criterion: Criterion,
    hook: &mut dyn FnMut(usize, &M) -> Result<()>,
    frozen_checks: &dyn Fn() -> usize,
) -> Result<(M, RunResult)> {
    let TrainOutcome {
        best,
        best_epoch,
        best_val_loss,
        trace,
        stopped_early,
    } = train_model(model, data, cfg, criterion, hook)?;
    let pred = data.scaler.invert(&predict_final(&best, &data.test));
    let result = finish(
        data,
        cfg,
        cfg.variant,
        pred,
        Some((trace, best_epoch, best_val_loss, stopped_early)),
        frozen_checks(),
    )?;
    Ok((best, result))
}

/// Trains the source network on prediction plus reconstruction error and
/// extracts the best-validation recurrent cell as an artifact.
pub fn run_pretrain(
    data: &DemandMatrix,
    cfg: &RunConfig,
    metadata: ArtifactMetadata,
) -> Result<(PretrainedArtifact, RunResult)> {
    let prepared = prepare(data, cfg)?;
    let net = PretrainNet::pretrain(cfg.dims(prepared.stations()), cfg.seed);
    let (best, result) = fit_and_finish(net, &prepared, cfg, Criterion::TotalLoss, &mut |_, _| Ok(()), &|| 0)?;
    let mut metadata = metadata;
    for (k, v) in cfg.echo() {
        if k != "variant" {
            metadata.config.push((k, v));
        }
    }
    let artifact = PretrainedArtifact::from_net(&best, metadata)?;
    Ok((artifact, result))
}

/// Trains the full model sharing network (`cfg.variant` is ignored) with
/// the artifact's cell as the frozen adapter.
pub fn run_adapt(data: &DemandMatrix, artifact: &PretrainedArtifact, cfg: &RunConfig) -> Result<RunResult> {
    let cfg = RunConfig {
        variant: VariantKind::UnKadf,
        ..cfg.clone()
    };
    run_variant(data, &cfg, Some(artifact))
}

/// Trains or fits `cfg.variant` and evaluates it on the test windows.
pub fn run_variant(data: &DemandMatrix, cfg: &RunConfig, artifact: Option<&PretrainedArtifact>) -> Result<RunResult> {
    let prepared = prepare(data, cfg)?;
    run_variant_prepared(&prepared, cfg, artifact).map(|(_, r)| r)
}

/// The trained network of a neural variant.
#[derive(Debug, Clone)]
pub enum TrainedModel {
    Recurrent(crate::models::RecurrentNet),
    Sharing(SharingNet),
    Baseline,
}

/// [`run_variant`] on already prepared data, also returning the trained
/// weights.
pub fn run_variant_prepared(
    prepared: &Prepared,
    cfg: &RunConfig,
    artifact: Option<&PretrainedArtifact>,
) -> Result<(TrainedModel, RunResult)> {
    cfg.validate()?;
    let dims = cfg.dims(prepared.stations());
    let model = build_variant(cfg.variant, dims, artifact, cfg.gamma, cfg.beta, cfg.seed)?;
    match model {
        VariantModel::Recurrent(net) => {
            let (best, r) = fit_and_finish(net, prepared, cfg, Criterion::FinalStep, &mut |_, _| Ok(()), &|| 0)?;
            Ok((TrainedModel::Recurrent(best), r))
        }
        VariantModel::Sharing(net) => {
            let reference: Option<LstmCellParams> = net.adapter_params();
            let checks = core::cell::Cell::new(0usize);
            let mut hook = |epoch: usize, m: &SharingNet| -> Result<()> {
                if let Some(cell) = &reference {
                    if !m.adapter_matches(cell) {
                        return Err(Error::Numerical(format!(
                            "frozen adapter weights changed by epoch {epoch}"
                        )));
                    }
                    checks.set(checks.get() + 1);
                }
                Ok(())
            };
            let (best, r) = fit_and_finish(net, prepared, cfg, Criterion::FinalStep, &mut hook, &|| checks.get())?;
            if let (Some(a), Some(cell)) = (artifact, &reference) {
                if a.cell() != cell || !best.adapter_matches(a.cell()) {
                    return Err(Error::Numerical("adapter no longer matches the artifact".into()));
                }
            }
            Ok((TrainedModel::Sharing(best), r))
        }
        VariantModel::HistoricalAverage => {
            let pred = ha_forecast(&prepared.split.train, &prepared.test_times());
            Ok((TrainedModel::Baseline, finish(prepared, cfg, cfg.variant, pred, None, 0)?))
        }
        VariantModel::LinearRegression => {
            let pred = prepared.scaler.invert(&lr_fit_forecast(&prepared.train, &prepared.test)?);
            Ok((TrainedModel::Baseline, finish(prepared, cfg, cfg.variant, pred, None, 0)?))
        }
    }
}
