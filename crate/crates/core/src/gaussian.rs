//! Single multivariate Gaussian: density, maximum-likelihood fit, sampling.
//!
//! The density is
//!
//! ```text
//! N(x | mu, Sigma) = (2 pi)^(-d/2) |Sigma|^(-1/2)
//!                    exp(-(x - mu)' Sigma^(-1) (x - mu) / 2)
//! ```
//!
//! evaluated in log space through a Cholesky factor, never through an
//! explicit inverse. The MLE is the sample mean and the 1/n scatter
//! matrix; a small diagonal regularizer keeps the scatter factorizable
//! when it is singular (duplicated points, n < d).

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg::{cholesky, Cholesky, SymMatrix};
use crate::rng::RngStream;

/// Relative part of the diagonal regularizer: this times `trace(S)/d`.
pub const COV_REG_REL: f64 = 1e-9;
/// Absolute floor of the diagonal regularizer.
pub const COV_REG_ABS: f64 = 1e-12;

const LN_2PI: f64 = 1.837877066409345483560659472811235279722794947275566825634;

/// Mean and covariance of one Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianParams {
    pub mean: Vec<f64>,
    pub cov: SymMatrix,
}

impl GaussianParams {
    pub fn new(mean: Vec<f64>, cov: SymMatrix) -> Result<Self> {
        if mean.len() != cov.order() {
            return Err(Error::LengthMismatch {
                expected: cov.order(),
                got: mean.len(),
            });
        }
        Ok(GaussianParams { mean, cov })
    }

    pub fn d(&self) -> usize {
        self.mean.len()
    }

    /// Factor the covariance once for repeated density queries.
    pub fn prepare(&self) -> Result<Prepared> {
        let chol = cholesky(&self.cov)?;
        let log_norm = -0.5 * (self.d() as f64 * LN_2PI + chol.log_det());
        Ok(Prepared {
            mean: self.mean.clone(),
            chol,
            log_norm,
        })
    }

    /// Log density at `x`.
    pub fn log_pdf(&self, x: &[f64]) -> Result<f64> {
        Ok(self.prepare()?.log_pdf(x))
    }

    /// Draw `count` points as `mu + L z` with `z` standard normal.
    pub fn sample(&self, count: usize, rng: &mut RngStream) -> Result<Dataset> {
        if count == 0 {
            return Err(Error::invalid("sample count must be at least 1"));
        }
        let prepared = self.prepare()?;
        let d = self.d();
        let mut values = Vec::with_capacity(count * d);
        for _ in 0..count {
            let z: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
            let offset = prepared.chol.transform(&z);
            values.extend(self.mean.iter().zip(offset).map(|(m, o)| m + o));
        }
        Dataset::new(values, d)
    }
}

/// A Gaussian with its covariance already factored.
#[derive(Debug, Clone)]
pub struct Prepared {
    mean: Vec<f64>,
    chol: Cholesky,
    log_norm: f64,
}

impl Prepared {
    pub fn log_pdf(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.mean.len());
        let diff: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        self.log_norm - 0.5 * self.chol.mahalanobis_sq(&diff)
    }
}

/// Maximum-likelihood mean and covariance of `data`.
pub fn fit_mle(data: &Dataset) -> GaussianParams {
    fit_mle_counted(data).0
}

/// Like [`fit_mle`], also reporting the number of multiply-accumulate
/// operations spent on the scatter matrix: exactly `n * d * d`, the term
/// that dominates the fit's cost.
pub fn fit_mle_counted(data: &Dataset) -> (GaussianParams, u64) {
    let n = data.n();
    let d = data.d();
    let mean = data.mean();
    let mut scatter = vec![0.0; d * d];
    let mut mult_adds = 0u64;
    let mut dev = vec![0.0; d];
    for p in data.points() {
        for (dv, (x, m)) in dev.iter_mut().zip(p.iter().zip(&mean)) {
            *dv = x - m;
        }
        for a in 0..d {
            for b in 0..d {
                scatter[a * d + b] += dev[a] * dev[b];
                mult_adds += 1;
            }
        }
    }
    for v in &mut scatter {
        *v /= n as f64;
    }
    let mut cov = SymMatrix::from_fn(d, |i, j| scatter[i * d + j]);
    cov.add_diagonal(regularizer(&cov));
    (GaussianParams { mean, cov }, mult_adds)
}

/// Diagonal shift applied to a raw scatter matrix before factoring.
pub fn regularizer(raw_cov: &SymMatrix) -> f64 {
    COV_REG_REL * raw_cov.trace() / raw_cov.order() as f64 + COV_REG_ABS
}
