use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::nn::Matrix;

/// All stride-1 teacher-forced windows of one series.
///
/// Window `k` has inputs rows `k..k+tau` and targets rows `k+1..k+tau+1`.
/// Both are borrowed as contiguous row-major slices of the underlying series.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowBatch {
    series: Matrix,
    tau: usize,
}

pub fn make_windows(series: &Matrix, tau: usize) -> Result<WindowBatch> {
    WindowBatch::new(series.clone(), tau)
}

impl WindowBatch {
    pub fn new(series: Matrix, tau: usize) -> Result<Self> {
        if tau == 0 {
            return Err(Error::Config("window length must be at least 1".into()));
        }
        if series.rows() <= tau {
            return Err(Error::InsufficientData {
                part: "windows",
                needed: tau + 1,
                found: series.rows(),
            });
        }
        Ok(WindowBatch { series, tau })
    }

    pub fn len(&self) -> usize {
        self.series.rows() - self.tau
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn tau(&self) -> usize {
        self.tau
    }

    pub fn stations(&self) -> usize {
        self.series.cols()
    }

    pub fn series(&self) -> &Matrix {
        &self.series
    }

    /// `tau x N` inputs of window `k`.
    pub fn inputs(&self, k: usize) -> &[f64] {
        self.series.row_range(k, k + self.tau)
    }

    /// `tau x N` one-step-shifted targets of window `k`.
    pub fn targets(&self, k: usize) -> &[f64] {
        self.series.row_range(k + 1, k + self.tau + 1)
    }

    /// Row index (within the series) of the value predicted at the final
    /// position of window `k`.
    pub fn final_target_row(&self, k: usize) -> usize {
        k + self.tau
    }

    pub fn window_start_indices(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }
}
