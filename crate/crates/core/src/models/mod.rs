//! Network definitions and baselines.
//!
//! * [`RecurrentNet`] - single-branch network: the source pre-training network
//!   (encoder, LSTM, predictor, decoder), the plain LSTM variant and Fine-Tune.
//! * [`SharingNet`] - the target model sharing network with individual and
//!   sharing branches, optional decoder and optional frozen adapter cell.
//! * [`VariantKind`] / [`build_variant`] - the ablation and baseline catalogue.

mod baselines;
mod recurrent;
mod sharing;
mod variant;

pub use baselines::{ha_forecast, lr_fit_forecast, HistoricalAverage, LinearAutoregression};
pub use recurrent::{pretrain_loss, PretrainNet, PretrainOutput, RecurrentNet, RecurrentScratch};
pub use sharing::{unkadf_loss, SharingNet, SharingOutput, SharingScratch};
pub use variant::{build_variant, reference_loss_weights, Mode, VariantKind, VariantModel};

use crate::nn::Parameterized;

/// Embedding width `K`, hidden width `m` and station count `N` of a network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub stations: usize,
    pub embed: usize,
    pub hidden: usize,
}

/// Loss of one window (or a mean over windows).
///
/// `prediction`, `reconstruction` and `alignment` are the prediction,
/// recovery and memory-cell alignment terms; `total` is their weighted sum
/// under the model's loss weights.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct LossTerms {
    pub total: f64,
    pub prediction: f64,
    pub reconstruction: f64,
    pub alignment: f64,
}

impl LossTerms {
    pub fn is_finite(&self) -> bool {
        self.total.is_finite()
            && self.prediction.is_finite()
            && self.reconstruction.is_finite()
            && self.alignment.is_finite()
    }

    pub(crate) fn add_scaled(&mut self, other: &LossTerms, w: f64) {
        self.total += w * other.total;
        self.prediction += w * other.prediction;
        self.reconstruction += w * other.reconstruction;
        self.alignment += w * other.alignment;
    }
}

/// A network trained on teacher-forced windows.
pub trait WindowModel: Parameterized {
    type Scratch: Default;

    fn stations(&self) -> usize;

    /// Forward pass over one `tau x N` window, kept in `s` for `backward`.
    fn forward_window(&self, inputs: &[f64], tau: usize, s: &mut Self::Scratch);

    /// `tau x N` one-step-ahead predictions of the last forward pass.
    fn predictions<'a>(&self, s: &'a Self::Scratch) -> &'a [f64];

    /// Loss terms of the last forward pass against `targets`.
    fn window_loss(&self, inputs: &[f64], targets: &[f64], s: &Self::Scratch) -> LossTerms;

    /// Accumulates `scale * dLoss/dParam` of the last forward pass.
    fn backward_window(&mut self, inputs: &[f64], targets: &[f64], s: &mut Self::Scratch, scale: f64);
}
