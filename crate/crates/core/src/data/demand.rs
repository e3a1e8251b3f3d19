use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// `T x N` station demand (passenger counts per interval).
///
/// `first_step` is the absolute index of row 0 in the original series, so
/// hour-of-day stays recoverable after chronological splits.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandMatrix {
    station_ids: Vec<String>,
    timestamps: Option<Vec<String>>,
    values: Matrix,
    first_step: usize,
}

impl DemandMatrix {
    pub fn new(
        station_ids: Vec<String>,
        timestamps: Option<Vec<String>>,
        values: Matrix,
    ) -> Result<Self> {
        if station_ids.len() != values.cols() {
            return Err(Error::dim(
                "DemandMatrix",
                format!("{} station ids for {} columns", station_ids.len(), values.cols()),
            ));
        }
        if let Some(ts) = &timestamps {
            if ts.len() != values.rows() {
                return Err(Error::dim(
                    "DemandMatrix",
                    format!("{} timestamps for {} rows", ts.len(), values.rows()),
                ));
            }
        }
        if let Some((k, v)) = values
            .as_slice()
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite() || **v < 0.0)
        {
            let cols = values.cols().max(1);
            return Err(Error::Config(format!(
                "demand at row {}, station {} is {v}; values must be finite and >= 0",
                k / cols,
                k % cols
            )));
        }
        Ok(DemandMatrix {
            station_ids,
            timestamps,
            values,
            first_step: 0,
        })
    }

    /// Station ids `s0..s{N-1}`, no timestamps.
    pub fn from_values(values: Matrix) -> Result<Self> {
        let ids = (0..values.cols()).map(|i| format!("s{i}")).collect();
        DemandMatrix::new(ids, None, values)
    }

    pub fn with_first_step(mut self, first_step: usize) -> Self {
        self.first_step = first_step;
        self
    }

    pub fn station_ids(&self) -> &[String] {
        &self.station_ids
    }

    pub fn timestamps(&self) -> Option<&[String]> {
        self.timestamps.as_deref()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    pub fn first_step(&self) -> usize {
        self.first_step
    }

    /// Number of time steps `T`.
    pub fn steps(&self) -> usize {
        self.values.rows()
    }

    /// Number of stations `N`.
    pub fn stations(&self) -> usize {
        self.values.cols()
    }

    pub fn station(&self, i: usize) -> Vec<f64> {
        self.values.column_values(i)
    }

    /// Rows `start..end`, keeping absolute time.
    pub fn slice_steps(&self, start: usize, end: usize) -> DemandMatrix {
        DemandMatrix {
            station_ids: self.station_ids.clone(),
            timestamps: self.timestamps.as_ref().map(|t| t[start..end].to_vec()),
            values: self.values.slice_rows(start, end),
            first_step: self.first_step + start,
        }
    }

    pub fn select_stations(&self, keep: &[usize]) -> DemandMatrix {
        DemandMatrix {
            station_ids: keep.iter().map(|&i| self.station_ids[i].clone()).collect(),
            timestamps: self.timestamps.clone(),
            values: self.values.select_columns(keep),
            first_step: self.first_step,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn rejects_negative_and_ragged_metadata() {
        let m = Matrix::from_rows(&[[1.0, -1.0]]).unwrap();
        assert!(DemandMatrix::from_values(m).is_err());
        let m = Matrix::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(DemandMatrix::new(vec!["a".into()], None, m.clone()).is_err());
        assert!(DemandMatrix::new(vec!["a".into(), "b".into()], Some(vec![]), m).is_err());
    }
}
