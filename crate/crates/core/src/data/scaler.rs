use alloc::vec::Vec;

use super::DemandMatrix;
use crate::nn::Matrix;

/// Per-station min-max scaling fitted on one (training) matrix.
///
/// Stations whose training range is empty (`max == min`) are constant and map
/// to 0; inverting a constant station returns its training value. No clamping
/// is applied, so out-of-range values map outside `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinMaxScaler {
    min: Vec<f64>,
    max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(train: &DemandMatrix) -> Self {
        Self::fit_matrix(train.values())
    }

    pub fn fit_matrix(m: &Matrix) -> Self {
        let n = m.cols();
        let mut min = alloc::vec![f64::INFINITY; n];
        let mut max = alloc::vec![f64::NEG_INFINITY; n];
        for r in 0..m.rows() {
            for (i, &v) in m.row(r).iter().enumerate() {
                min[i] = min[i].min(v);
                max[i] = max[i].max(v);
            }
        }
        if m.rows() == 0 {
            min.iter_mut().for_each(|v| *v = 0.0);
            max.iter_mut().for_each(|v| *v = 0.0);
        }
        MinMaxScaler { min, max }
    }

    pub fn stations(&self) -> usize {
        self.min.len()
    }

    pub fn min(&self) -> &[f64] {
        &self.min
    }

    pub fn max(&self) -> &[f64] {
        &self.max
    }

    pub fn is_constant(&self, station: usize) -> bool {
        self.max[station] == self.min[station]
    }

    #[inline]
    pub fn apply_value(&self, station: usize, v: f64) -> f64 {
        if self.is_constant(station) {
            0.0
        } else {
            (v - self.min[station]) / (self.max[station] - self.min[station])
        }
    }

    #[inline]
    pub fn invert_value(&self, station: usize, v: f64) -> f64 {
        if self.is_constant(station) {
            self.min[station]
        } else {
            v * (self.max[station] - self.min[station]) + self.min[station]
        }
    }

    pub fn apply(&self, m: &Matrix) -> Matrix {
        self.map(m, Self::apply_value)
    }

    pub fn invert(&self, m: &Matrix) -> Matrix {
        self.map(m, Self::invert_value)
    }

    fn map(&self, m: &Matrix, f: fn(&Self, usize, f64) -> f64) -> Matrix {
        assert_eq!(m.cols(), self.stations(), "scaler station count");
        let mut out = m.clone();
        for r in 0..out.rows() {
            for (i, v) in out.row_mut(r).iter_mut().enumerate() {
                *v = f(self, i, *v);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn col(v: &[f64]) -> Matrix {
        Matrix::column(v)
    }

    #[test]
    fn endpoints_and_extrapolation() {
        let s = MinMaxScaler::fit_matrix(&col(&[0.0, 5.0, 10.0]));
        assert_eq!(s.apply(&col(&[0.0, 5.0, 10.0])).as_slice(), &[0.0, 0.5, 1.0]);

        let s = MinMaxScaler::fit_matrix(&col(&[2.0, 4.0]));
        assert_eq!(s.apply_value(0, 6.0), 2.0);
        assert_eq!(s.invert_value(0, 2.0), 6.0);
    }

    #[test]
    fn constant_station_scales_to_zero() {
        let s = MinMaxScaler::fit_matrix(&col(&[3.0, 3.0]));
        assert!(s.is_constant(0));
        assert_eq!(s.apply_value(0, 7.0), 0.0);
        assert_eq!(s.invert_value(0, 0.0), 3.0);
    }
}
