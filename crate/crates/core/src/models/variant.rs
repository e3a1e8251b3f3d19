use alloc::format;

use core::fmt;
use core::str::FromStr;

use super::{Dims, RecurrentNet, SharingNet};
use crate::artifact::PretrainedArtifact;
use crate::error::{Error, Result};

/// The compared architectures and baselines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VariantKind {
    /// LSTM on raw demand plus a predictor; prediction loss only.
    Lstm,
    /// Dual encoders and LSTMs, no decoder, no adapter.
    EncoderLstm,
    /// Dual encoders and LSTMs with decoder, no adapter.
    EncoderDecoder,
    /// Dual encoders and LSTMs with the frozen adapter, no decoder.
    EncoderAdaptation,
    /// The full model sharing network.
    UnKadf,
    /// Encoder plus an LSTM warm-started from the artifact, all trainable.
    FineTune,
    /// Historical average at the same hour of day.
    HistoricalAverage,
    /// Per-station least-squares autoregression on the window lags.
    LinearRegression,
}

impl VariantKind {
    pub const ALL: [VariantKind; 8] = [
        VariantKind::Lstm,
        VariantKind::EncoderLstm,
        VariantKind::EncoderDecoder,
        VariantKind::EncoderAdaptation,
        VariantKind::UnKadf,
        VariantKind::FineTune,
        VariantKind::HistoricalAverage,
        VariantKind::LinearRegression,
    ];

    pub fn needs_artifact(self) -> bool {
        matches!(
            self,
            VariantKind::EncoderAdaptation | VariantKind::UnKadf | VariantKind::FineTune
        )
    }

    pub fn is_neural(self) -> bool {
        !matches!(self, VariantKind::HistoricalAverage | VariantKind::LinearRegression)
    }

    pub fn name(self) -> &'static str {
        match self {
            VariantKind::Lstm => "lstm",
            VariantKind::EncoderLstm => "encoder-lstm",
            VariantKind::EncoderDecoder => "encoder-decoder",
            VariantKind::EncoderAdaptation => "encoder-adaptation",
            VariantKind::UnKadf => "unkadf",
            VariantKind::FineTune => "finetune",
            VariantKind::HistoricalAverage => "ha",
            VariantKind::LinearRegression => "lr",
        }
    }

    /// Loss weights actually used by the variant given the requested ones.
    pub fn effective_weights(self, gamma: f64, beta: f64) -> (f64, f64) {
        match self {
            VariantKind::UnKadf => (gamma, beta),
            VariantKind::EncoderDecoder => (gamma, 0.0),
            VariantKind::EncoderAdaptation => (0.0, beta),
            _ => (0.0, 0.0),
        }
    }
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for VariantKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        VariantKind::ALL
            .into_iter()
            .find(|k| k.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Config(format!("unknown model '{s}'")))
    }
}

/// A built variant, ready for training or fitting.
#[derive(Debug, Clone)]
pub enum VariantModel {
    Recurrent(RecurrentNet),
    Sharing(SharingNet),
    HistoricalAverage,
    LinearRegression,
}

/// Builds `kind` for `dims`. `gamma` / `beta` are ignored by variants that
/// lack the corresponding component.
pub fn build_variant(
    kind: VariantKind,
    dims: Dims,
    artifact: Option<&PretrainedArtifact>,
    gamma: f64,
    beta: f64,
    seed: u64,
) -> Result<VariantModel> {
    let cell = match (kind.needs_artifact(), artifact) {
        (true, None) => {
            return Err(Error::Config(format!("model '{kind}' requires a pretrained artifact")))
        }
        (true, Some(a)) => {
            if a.embed_dim() != dims.embed || a.hidden_dim() != dims.hidden {
                return Err(Error::IncompatibleArtifact(format!(
                    "artifact has K={} m={}, run is configured with K={} m={}",
                    a.embed_dim(),
                    a.hidden_dim(),
                    dims.embed,
                    dims.hidden
                )));
            }
            Some(a.cell())
        }
        (false, _) => None,
    };
    let (g, b) = kind.effective_weights(gamma, beta);
    Ok(match kind {
        VariantKind::Lstm => VariantModel::Recurrent(RecurrentNet::plain_lstm(dims.stations, dims.hidden, seed)),
        VariantKind::FineTune => VariantModel::Recurrent(RecurrentNet::fine_tune(
            dims.stations,
            cell.expect("checked"),
            seed,
        )?),
        VariantKind::EncoderLstm => VariantModel::Sharing(SharingNet::new(dims, None, false, g, b, seed)?),
        VariantKind::EncoderDecoder => VariantModel::Sharing(SharingNet::new(dims, None, true, g, b, seed)?),
        VariantKind::EncoderAdaptation => VariantModel::Sharing(SharingNet::new(dims, cell, false, g, b, seed)?),
        VariantKind::UnKadf => VariantModel::Sharing(SharingNet::new(dims, cell, true, g, b, seed)?),
        VariantKind::HistoricalAverage => VariantModel::HistoricalAverage,
        VariantKind::LinearRegression => VariantModel::LinearRegression,
    })
}

/// Transport modes with tuned loss weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Bus,
    Train,
    LightRail,
    Ferry,
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', ' '], "-").as_str() {
            "bus" => Ok(Mode::Bus),
            "train" => Ok(Mode::Train),
            "light-rail" | "lightrail" => Ok(Mode::LightRail),
            "ferry" => Ok(Mode::Ferry),
            _ => Err(Error::Config(format!("unknown transport mode '{s}'"))),
        }
    }
}

/// Tuned `(gamma, beta)` for adapting a model pre-trained on `source` to
/// `target`. `None` when `target == source`.
pub fn reference_loss_weights(target: Mode, source: Mode) -> Option<(f64, f64)> {
    use Mode::*;
    let w = match (target, source) {
        (Bus, Train) => (0.4, 1.0),
        (Bus, LightRail) => (1.0, 0.4),
        (Bus, Ferry) => (0.5, 0.1),
        (Train, Bus) => (0.6, 0.7),
        (Train, LightRail) => (0.6, 0.9),
        (Train, Ferry) => (0.4, 0.7),
        (LightRail, Bus) => (0.9, 0.3),
        (LightRail, Train) => (0.3, 0.1),
        (LightRail, Ferry) => (1.0, 0.6),
        (Ferry, Bus) => (0.1, 0.6),
        (Ferry, Train) => (0.6, 0.6),
        (Ferry, LightRail) => (0.5, 0.6),
        _ => return None,
    };
    Some(w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in VariantKind::ALL {
            assert_eq!(k.name().parse::<VariantKind>().unwrap(), k);
        }
        assert!("xgboost".parse::<VariantKind>().is_err());
    }

    #[test]
    fn bus_from_train_weights() {
        assert_eq!(reference_loss_weights(Mode::Bus, Mode::Train), Some((0.4, 1.0)));
        assert_eq!(reference_loss_weights(Mode::Ferry, Mode::Ferry), None);
        assert_eq!("Light Rail".parse::<Mode>().unwrap(), Mode::LightRail);
    }

    #[test]
    fn artifact_is_required() {
        let dims = Dims { stations: 3, embed: 2, hidden: 2 };
        for k in [VariantKind::UnKadf, VariantKind::EncoderAdaptation, VariantKind::FineTune] {
            assert_eq!(build_variant(k, dims, None, 0.1, 0.1, 0).unwrap_err().class(), "config");
        }
        assert!(build_variant(VariantKind::EncoderLstm, dims, None, 0.1, 0.1, 0).is_ok());
    }
}
