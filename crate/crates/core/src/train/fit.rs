use alloc::format;
use alloc::vec::Vec;

use rand::seq::SliceRandom;

use super::{Prepared, RunConfig};
use crate::data::WindowBatch;
use crate::error::{Error, Result};
use crate::models::{LossTerms, WindowModel};
use crate::nn::{Adam, AdamConfig, Matrix};
use crate::rng;

/// What the validation loss measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Criterion {
    /// The model's full training objective over the window.
    TotalLoss,
    /// Squared error of the final-position prediction, the quantity
    /// evaluated on the test set.
    FinalStep,
}

/// One line of the loss trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    /// Mean over the epoch's training windows, measured before each update.
    pub train: LossTerms,
    pub val_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome<M> {
    /// Weights of the best validation epoch.
    pub best: M,
    pub best_epoch: usize,
    pub best_val_loss: f64,
    pub trace: Vec<EpochRecord>,
    pub stopped_early: bool,
}

/// Mini-batch Adam training with validation-based checkpointing.
///
/// `hook` runs on the initial model (epoch 0) and after every epoch; an error
/// from it aborts training.
pub fn train_model<M>(
    model: M,
    data: &Prepared,
    cfg: &RunConfig,
    criterion: Criterion,
    hook: &mut dyn FnMut(usize, &M) -> Result<()>,
) -> Result<TrainOutcome<M>>
where
    M: WindowModel + Clone,
{
    cfg.validate()?;
    if model.stations() != data.stations() {
        return Err(Error::dim(
            "train_model",
            format!("model has {} stations, data has {}", model.stations(), data.stations()),
        ));
    }
    let mut model = model;
    let mut adam = Adam::new(AdamConfig::with_lr(cfg.lr));
    let mut shuffle = rng::stream(cfg.seed, "shuffle");
    let mut order = data.train.window_start_indices();
    let mut scratch = M::Scratch::default();
    let (train, tau) = (&data.train, data.train.tau());

    hook(0, &model)?;
    let mut best: Option<(M, usize, f64)> = None;
    let mut trace = Vec::new();
    let mut stopped_early = false;
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut shuffle);
        let mut epoch_loss = LossTerms::default();
        let inv_len = 1.0 / order.len() as f64;
        for batch in order.chunks(cfg.batch_size) {
            model.zero_grads();
            let scale = 1.0 / batch.len() as f64;
            for &k in batch {
                model.forward_window(train.inputs(k), tau, &mut scratch);
                let loss = model.window_loss(train.inputs(k), train.targets(k), &scratch);
                if !loss.is_finite() {
                    return Err(Error::Divergence {
                        epoch,
                        detail: format!("non-finite loss on training window {k}"),
                    });
                }
                epoch_loss.add_scaled(&loss, inv_len);
                model.backward_window(train.inputs(k), train.targets(k), &mut scratch, scale);
            }
            adam.step(model.params_mut());
        }
        if !model.all_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: "non-finite weights after update".into(),
            });
        }
        let val_loss = validation_loss(&model, &data.val, criterion, &mut scratch);
        if !val_loss.is_finite() {
            return Err(Error::Divergence {
                epoch,
                detail: "non-finite validation loss".into(),
            });
        }
        trace.push(EpochRecord {
            epoch,
            train: epoch_loss,
            val_loss,
        });
        hook(epoch, &model)?;
        match &best {
            Some((_, _, b)) if val_loss >= *b => {}
            _ => best = Some((model.clone(), epoch, val_loss)),
        }
        let best_epoch = best.as_ref().map_or(epoch, |b| b.1);
        if cfg.patience.is_some_and(|p| epoch - best_epoch >= p) {
            stopped_early = epoch < cfg.epochs;
            break;
        }
    }
    let (best, best_epoch, best_val_loss) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        best,
        best_epoch,
        best_val_loss,
        trace,
        stopped_early,
    })
}

/// Mean validation loss over all windows of `windows`.
pub fn validation_loss<M: WindowModel>(
    model: &M,
    windows: &WindowBatch,
    criterion: Criterion,
    scratch: &mut M::Scratch,
) -> f64 {
    let (tau, n) = (windows.tau(), windows.stations());
    let mut sum = 0.0;
    for k in 0..windows.len() {
        model.forward_window(windows.inputs(k), tau, scratch);
        sum += match criterion {
            Criterion::TotalLoss => model.window_loss(windows.inputs(k), windows.targets(k), scratch).total,
            Criterion::FinalStep => {
                let pred = &model.predictions(scratch)[(tau - 1) * n..];
                let actual = windows.series().row(windows.final_target_row(k));
                pred.iter().zip(actual).map(|(p, a)| (p - a) * (p - a)).sum::<f64>() / n as f64
            }
        };
    }
    sum / windows.len() as f64
}

/// `len x N` final-position predictions (scaled) for every window.
pub fn predict_final<M: WindowModel>(model: &M, windows: &WindowBatch) -> Matrix {
    let (tau, n) = (windows.tau(), windows.stations());
    let mut scratch = M::Scratch::default();
    let mut out = Matrix::zeros(windows.len(), n);
    for k in 0..windows.len() {
        model.forward_window(windows.inputs(k), tau, &mut scratch);
        out.row_mut(k).copy_from_slice(&model.predictions(&scratch)[(tau - 1) * n..]);
    }
    out
}
