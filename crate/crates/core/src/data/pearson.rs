use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::DemandMatrix;
use crate::error::{Error, Result};
use crate::math::sqrt;

/// Running co-moment accumulator (single pass, numerically stable).
#[derive(Debug, Clone, Copy, Default)]
struct CoMoment {
    n: f64,
    mean_x: f64,
    mean_y: f64,
    m2_x: f64,
    m2_y: f64,
    c_xy: f64,
}

impl CoMoment {
    #[inline]
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1.0;
        let dx = x - self.mean_x;
        self.mean_x += dx / self.n;
        let dy = y - self.mean_y;
        self.mean_y += dy / self.n;
        self.m2_x += dx * (x - self.mean_x);
        self.m2_y += dy * (y - self.mean_y);
        self.c_xy += dx * (y - self.mean_y);
    }

    fn coefficient(&self) -> Option<f64> {
        if self.m2_x <= 0.0 || self.m2_y <= 0.0 {
            return None;
        }
        Some((self.c_xy / sqrt(self.m2_x * self.m2_y)).clamp(-1.0, 1.0))
    }
}

/// Pearson coefficient of two equally long series; `None` if either is constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Result<Option<f64>> {
    if a.len() != b.len() {
        return Err(Error::dim(
            "pearson",
            format!("series lengths {} and {}", a.len(), b.len()),
        ));
    }
    let mut acc = CoMoment::default();
    for (&x, &y) in a.iter().zip(b) {
        acc.push(x, y);
    }
    Ok(acc.coefficient())
}

/// Station-by-station coefficients; `None` marks an undefined (constant) pair.
#[derive(Debug, Clone, PartialEq)]
pub struct Correlations {
    rows: usize,
    cols: usize,
    values: Vec<Option<f64>>,
}

impl Correlations {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.values[i * self.cols + j]
    }

    pub fn transpose(&self) -> Correlations {
        let mut values = vec![None; self.values.len()];
        for i in 0..self.rows {
            for j in 0..self.cols {
                values[j * self.rows + i] = self.get(i, j);
            }
        }
        Correlations {
            rows: self.cols,
            cols: self.rows,
            values,
        }
    }

    /// Defined coefficients in row-major order.
    pub fn defined(&self) -> impl Iterator<Item = f64> + '_ {
        self.values.iter().flatten().copied()
    }

    pub fn undefined_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_none()).count()
    }

    /// Fraction of defined pairs whose coefficient exceeds `threshold`.
    pub fn fraction_above(&self, threshold: f64) -> f64 {
        let (mut hit, mut total) = (0usize, 0usize);
        for v in self.defined() {
            total += 1;
            if v > threshold {
                hit += 1;
            }
        }
        if total == 0 {
            0.0
        } else {
            hit as f64 / total as f64
        }
    }

    /// Histogram over `[-1, 1]` with bins of width `width`; undefined pairs are
    /// excluded.
    pub fn histogram(&self, width: f64) -> Histogram {
        let bins = libm::ceil(2.0 / width - 1e-9) as usize;
        let mut counts = vec![0usize; bins];
        for v in self.defined() {
            let k = libm::floor((v + 1.0) / width + 1e-9) as usize;
            counts[k.min(bins - 1)] += 1;
        }
        Histogram {
            lower: -1.0,
            width,
            counts,
            undefined: self.undefined_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub lower: f64,
    pub width: f64,
    pub counts: Vec<usize>,
    pub undefined: usize,
}

impl Histogram {
    /// `(lo, hi, count)` per bin.
    pub fn bins(&self) -> impl Iterator<Item = (f64, f64, usize)> + '_ {
        self.counts.iter().enumerate().map(move |(k, &c)| {
            let lo = self.lower + k as f64 * self.width;
            (lo, lo + self.width, c)
        })
    }
}

/// Pearson coefficients between every station of `a` and every station of `b`.
pub fn pearson_matrix(a: &DemandMatrix, b: &DemandMatrix) -> Result<Correlations> {
    if a.steps() != b.steps() {
        return Err(Error::dim(
            "pearson_matrix",
            format!("a has {} steps, b has {}", a.steps(), b.steps()),
        ));
    }
    let (na, nb) = (a.stations(), b.stations());
    let mut acc = vec![CoMoment::default(); na * nb];
    // one streaming pass over time
    for t in 0..a.steps() {
        let ra = a.values().row(t);
        let rb = b.values().row(t);
        for (i, &x) in ra.iter().enumerate() {
            for (j, &y) in rb.iter().enumerate() {
                acc[i * nb + j].push(x, y);
            }
        }
    }
    Ok(Correlations {
        rows: na,
        cols: nb,
        values: acc.iter().map(CoMoment::coefficient).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_correlations() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), Some(1.0));
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), Some(-1.0));
        assert_eq!(pearson(&[1.0, 1.0, 1.0], &[3.0, 2.0, 1.0]).unwrap(), None);
        assert!(pearson(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn histogram_bins_cover_range() {
        let c = Correlations {
            rows: 1,
            cols: 4,
            values: vec![Some(-1.0), Some(0.05), Some(1.0), None],
        };
        let h = c.histogram(0.1);
        assert_eq!(h.counts.len(), 20);
        assert_eq!(h.counts[0], 1);
        assert_eq!(h.counts[10], 1);
        assert_eq!(h.counts[19], 1);
        assert_eq!(h.undefined, 1);
    }
}
