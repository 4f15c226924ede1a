//! Dataset container.

use crate::error::{Error, Result};

/// An n-by-d matrix of points, row-major, with optional generator labels.
///
/// Labels travel with the data so synthetic benchmarks can score a fit
/// against ground truth; algorithms never read them.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    d: usize,
    labels: Option<Vec<i64>>,
}

impl Dataset {
    /// Wrap a row-major buffer of `n * d` values.
    pub fn new(values: Vec<f64>, d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::invalid("dimension must be at least 1"));
        }
        if values.is_empty() || values.len() % d != 0 {
            return Err(Error::invalid(format!(
                "buffer of {} values is not a non-empty multiple of d = {d}",
                values.len()
            )));
        }
        let n = values.len() / d;
        for (idx, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: idx / d,
                    col: idx % d,
                });
            }
        }
        Ok(Dataset {
            values,
            n,
            d,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::invalid("dataset must contain at least one point"));
        }
        let d = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != d {
                return Err(Error::LengthMismatch {
                    expected: d,
                    got: row.len(),
                });
            }
            let _ = i;
        }
        let mut values = Vec::with_capacity(rows.len() * d);
        for row in rows {
            values.extend_from_slice(row);
        }
        Dataset::new(values, d)
    }

    /// Attach generator labels (one per point, `-1` allowed for noise).
    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: labels.len(),
            });
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.d)
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    /// Mean of all points.
    pub fn mean(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.d];
        for p in self.points() {
            for (acc, v) in m.iter_mut().zip(p) {
                *acc += v;
            }
        }
        for acc in &mut m {
            *acc /= self.n as f64;
        }
        m
    }
}

/// Squared Euclidean distance between two points of equal dimension.
pub fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum()
}

/// Euclidean distance between two points of equal dimension.
pub fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}
