//! Hard and soft cluster assignments.

use crate::error::{Error, Result};

/// Label used for points assigned to no cluster.
pub const OUTLIER: i64 = -1;

/// A hard partition: one cluster id per point, `-1` for outliers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardAssignment {
    cluster_of: Vec<i64>,
    k: usize,
}

impl HardAssignment {
    /// Wrap a label vector. Ids must be `-1` or non-negative; `k` is one
    /// past the largest id seen (0 if all points are outliers).
    pub fn new(cluster_of: Vec<i64>) -> Result<Self> {
        if cluster_of.is_empty() {
            return Err(Error::invalid("assignment must cover at least one point"));
        }
        let mut max_id: i64 = -1;
        for (i, &c) in cluster_of.iter().enumerate() {
            if c < OUTLIER {
                return Err(Error::invalid(format!(
                    "label {c} at point {i} is below the outlier label"
                )));
            }
            max_id = max_id.max(c);
        }
        Ok(HardAssignment {
            cluster_of,
            k: (max_id + 1) as usize,
        })
    }

    pub fn n(&self) -> usize {
        self.cluster_of.len()
    }

    /// Number of cluster ids in use (outliers excluded).
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn label(&self, i: usize) -> i64 {
        self.cluster_of[i]
    }

    pub fn labels(&self) -> &[i64] {
        &self.cluster_of
    }

    pub fn outlier_count(&self) -> usize {
        self.cluster_of.iter().filter(|&&c| c == OUTLIER).count()
    }

    /// Member indices of cluster `c`, in point order.
    pub fn members(&self, c: usize) -> Vec<usize> {
        self.cluster_of
            .iter()
            .enumerate()
            .filter(|(_, &l)| l == c as i64)
            .map(|(i, _)| i)
            .collect()
    }

    /// Points per cluster id `0..k`.
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0usize; self.k];
        for &c in &self.cluster_of {
            if c >= 0 {
                sizes[c as usize] += 1;
            }
        }
        sizes
    }

    /// Relabel clusters by order of first appearance; outliers keep `-1`.
    ///
    /// Two assignments that induce the same partition canonicalize to
    /// identical label vectors, which makes equality checks meaningful.
    pub fn canonicalize(&self) -> HardAssignment {
        let mut remap: Vec<Option<i64>> = vec![None; self.k];
        let mut next: i64 = 0;
        let mut out = Vec::with_capacity(self.cluster_of.len());
        for &c in &self.cluster_of {
            if c == OUTLIER {
                out.push(OUTLIER);
                continue;
            }
            let slot = &mut remap[c as usize];
            let id = *slot.get_or_insert_with(|| {
                let id = next;
                next += 1;
                id
            });
            out.push(id);
        }
        HardAssignment {
            cluster_of: out,
            k: next as usize,
        }
    }
}

/// A soft partition: an n-by-k row-stochastic responsibility matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftAssignment {
    resp: Vec<f64>,
    n: usize,
    k: usize,
}

/// Row sums may deviate from 1 by at most this much.
pub const ROW_SUM_TOL: f64 = 1e-9;

impl SoftAssignment {
    /// Wrap a row-major n-by-k buffer. Entries must be in `[0, 1]` and each
    /// row must sum to 1 within [`ROW_SUM_TOL`].
    pub fn new(resp: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || resp.is_empty() || resp.len() % k != 0 {
            return Err(Error::invalid(format!(
                "responsibility buffer of {} values is not a non-empty multiple of k = {k}",
                resp.len()
            )));
        }
        let n = resp.len() / k;
        for (idx, &v) in resp.iter().enumerate() {
            if !v.is_finite() || !(-ROW_SUM_TOL..=1.0 + ROW_SUM_TOL).contains(&v) {
                return Err(Error::NonFinite {
                    row: idx / k,
                    col: idx % k,
                });
            }
        }
        for i in 0..n {
            let sum: f64 = resp[i * k..(i + 1) * k].iter().sum();
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::RowNotStochastic { row: i, sum });
            }
        }
        Ok(SoftAssignment { resp, n, k })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.resp[i * self.k..(i + 1) * self.k]
    }

    pub fn get(&self, i: usize, c: usize) -> f64 {
        self.resp[i * self.k + c]
    }

    /// Collapse to the argmax per row; ties break toward the lower index.
    pub fn harden(&self) -> HardAssignment {
        let mut labels = Vec::with_capacity(self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let mut best = 0usize;
            for (c, &v) in row.iter().enumerate().skip(1) {
                if v > row[best] {
                    best = c;
                }
            }
            labels.push(best as i64);
        }
        HardAssignment {
            cluster_of: labels,
            k: self.k,
        }
    }
}
