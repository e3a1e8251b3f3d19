use alloc::string::String;
use alloc::vec::Vec;

use super::RunConfig;
use crate::data::{filter_stations, split, DemandMatrix, MinMaxScaler, Split, WindowBatch};
use crate::error::{Error, Result};
use crate::nn::Matrix;

/// Filtered, split, scaled and windowed data for one run.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub split: Split,
    /// Fitted on the training part only.
    pub scaler: MinMaxScaler,
    pub train: WindowBatch,
    pub val: WindowBatch,
    pub test: WindowBatch,
}

impl Prepared {
    pub fn stations(&self) -> usize {
        self.scaler.stations()
    }

    pub fn station_ids(&self) -> Vec<String> {
        self.split.train.station_ids().to_vec()
    }

    /// Unscaled values predicted at the final position of each test window.
    pub fn test_actuals(&self) -> Matrix {
        let t = self.split.test.values();
        t.slice_rows(self.test.tau(), t.rows())
    }

    /// Absolute time index of each test window's final target.
    pub fn test_times(&self) -> Vec<usize> {
        let start = self.split.test.first_step() + self.test.tau();
        (0..self.test.len()).map(|k| start + k).collect()
    }
}

/// Station filter, chronological split, train-fitted min-max scaling and
/// windowing of each part.
pub fn prepare(data: &DemandMatrix, cfg: &RunConfig) -> Result<Prepared> {
    cfg.validate()?;
    if data.steps() == 0 || data.stations() == 0 {
        return Err(Error::EmptyDataset("demand matrix has no rows or no stations".into()));
    }
    let filtered = filter_stations(data, cfg.zero_filter)?;
    let split = split(&filtered, cfg.split, cfg.tau)?;
    let scaler = MinMaxScaler::fit(&split.train);
    let windows = |d: &DemandMatrix| WindowBatch::new(scaler.apply(d.values()), cfg.tau);
    Ok(Prepared {
        train: windows(&split.train)?,
        val: windows(&split.val)?,
        test: windows(&split.test)?,
        scaler,
        split,
    })
}
