use alloc::format;
use alloc::vec::Vec;

use super::DemandMatrix;
use crate::error::{Error, Result};

/// Drops stations whose fraction of zero entries strictly exceeds
/// `zero_fraction_threshold`. Station order is preserved.
pub fn filter_stations(d: &DemandMatrix, zero_fraction_threshold: f64) -> Result<DemandMatrix> {
    if !(zero_fraction_threshold > 0.0 && zero_fraction_threshold <= 1.0) {
        return Err(Error::Config(format!(
            "zero-fraction threshold must be in (0, 1], got {zero_fraction_threshold}"
        )));
    }
    let t = d.steps();
    if t == 0 {
        return Err(Error::EmptyDataset("no time steps".into()));
    }
    let values = d.values();
    let keep: Vec<usize> = (0..d.stations())
        .filter(|&i| {
            let zeros = (0..t).filter(|&r| values.get(r, i) == 0.0).count();
            zeros as f64 / t as f64 <= zero_fraction_threshold + 1e-12
        })
        .collect();
    if keep.is_empty() {
        return Err(Error::EmptyDataset(format!(
            "all {} stations exceed the zero-fraction threshold {zero_fraction_threshold}",
            d.stations()
        )));
    }
    Ok(d.select_stations(&keep))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitFractions {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitFractions {
    fn default() -> Self {
        SplitFractions {
            train: 0.6,
            val: 0.2,
            test: 0.2,
        }
    }
}

impl SplitFractions {
    pub fn validate(&self) -> Result<()> {
        let all = [self.train, self.val, self.test];
        if all.iter().any(|f| !(*f > 0.0)) || (all.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "split fractions must be positive and sum to 1, got {all:?}"
            )));
        }
        Ok(())
    }
}

/// Chronological train / validation / test parts.
#[derive(Debug, Clone, PartialEq)]
pub struct Split {
    pub train: DemandMatrix,
    pub val: DemandMatrix,
    pub test: DemandMatrix,
}

/// Contiguous chronological split. Train and validation lengths are floored,
/// the remainder goes to test. Every part must hold at least `tau + 1` rows.
pub fn split(d: &DemandMatrix, fractions: SplitFractions, tau: usize) -> Result<Split> {
    fractions.validate()?;
    let t = d.steps();
    let n_train = floor_len(t, fractions.train);
    let n_val = floor_len(t, fractions.val);
    let n_test = t - n_train - n_val;
    for (part, len) in [("train", n_train), ("validation", n_val), ("test", n_test)] {
        if len < tau + 1 {
            return Err(Error::InsufficientData {
                part,
                needed: tau + 1,
                found: len,
            });
        }
    }
    Ok(Split {
        train: d.slice_steps(0, n_train),
        val: d.slice_steps(n_train, n_train + n_val),
        test: d.slice_steps(n_train + n_val, t),
    })
}

fn floor_len(t: usize, f: f64) -> usize {
    libm::floor(t as f64 * f + 1e-9) as usize
}
