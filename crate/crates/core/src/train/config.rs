use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::data::SplitFractions;
use crate::error::{Error, Result};
use crate::metrics::MaskPolicy;
use crate::models::{Dims, VariantKind};

/// Everything that determines a run besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub tau: usize,
    pub batch_size: usize,
    pub lr: f64,
    /// Upper bound on training epochs.
    pub epochs: usize,
    pub embed_dim: usize,
    pub hidden_dim: usize,
    pub gamma: f64,
    pub beta: f64,
    pub seed: u64,
    pub split: SplitFractions,
    /// Stations whose zero fraction exceeds this are dropped.
    pub zero_filter: f64,
    /// Stop after this many epochs without a validation improvement.
    pub patience: Option<usize>,
    pub variant: VariantKind,
    pub mask: MaskPolicy,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tau: 12,
            batch_size: 64,
            lr: 1e-4,
            epochs: 1000,
            embed_dim: 64,
            hidden_dim: 64,
            gamma: 0.4,
            beta: 1.0,
            seed: 0,
            split: SplitFractions::default(),
            zero_filter: 0.6,
            patience: Some(20),
            variant: VariantKind::UnKadf,
            mask: MaskPolicy::demand(),
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.tau == 0 {
            return fail("tau must be at least 1".into());
        }
        if self.batch_size == 0 {
            return fail("batch size must be at least 1".into());
        }
        if self.epochs == 0 {
            return fail("epochs must be at least 1".into());
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return fail(format!("learning rate must be positive, got {}", self.lr));
        }
        if self.embed_dim == 0 || self.hidden_dim == 0 {
            return fail("embedding and hidden widths must be at least 1".into());
        }
        for (name, w) in [("gamma", self.gamma), ("beta", self.beta)] {
            if !(w >= 0.0 && w.is_finite()) {
                return fail(format!("{name} must be finite and non-negative, got {w}"));
            }
        }
        if !(0.0..=1.0).contains(&self.zero_filter) {
            return fail(format!("zero filter must lie in [0, 1], got {}", self.zero_filter));
        }
        if self.patience == Some(0) {
            return fail("patience must be at least 1".into());
        }
        self.split.validate()
    }

    pub fn dims(&self, stations: usize) -> Dims {
        Dims {
            stations,
            embed: self.embed_dim,
            hidden: self.hidden_dim,
        }
    }

    /// `key=value` pairs describing the configuration.
    pub fn echo(&self) -> Vec<(String, String)> {
        let masked: Vec<&str> = self.mask.masked_metrics().map(|m| m.name()).collect();
        vec![
            ("variant".into(), self.variant.to_string()),
            ("tau".into(), self.tau.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("lr".into(), self.lr.to_string()),
            ("epochs".into(), self.epochs.to_string()),
            ("embed_dim".into(), self.embed_dim.to_string()),
            ("hidden_dim".into(), self.hidden_dim.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("beta".into(), self.beta.to_string()),
            ("seed".into(), self.seed.to_string()),
            (
                "split".into(),
                format!("{}/{}/{}", self.split.train, self.split.val, self.split.test),
            ),
            ("zero_filter".into(), self.zero_filter.to_string()),
            (
                "patience".into(),
                self.patience.map_or("none".into(), |p| p.to_string()),
            ),
            ("mask_zero_actuals".into(), masked.join(",")),
        ]
    }
}
