//! Spectral clustering in the style of Ng, Jordan and Weiss.
//!
//! The pipeline: gaussian kernel matrix K, inverse-degree weights
//! `W = diag(K 1)^(-1)`, top-k eigenvectors of `W^(1/2) K W^(1/2)` as an
//! embedding, then vanilla k-means on the (row-normalized) embedding
//! rows. The matrix diagonalized here is exactly the normalized
//! adjacency of the complete similarity graph on the same data, which is
//! why the k-means partition of the embedding relaxes the normalized-cut
//! objective of the graph module.

use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelSpec};
use crate::kmeans::{self, KmeansFit, KmeansInit};
use crate::linalg::{sym_eig, SymMatrix};
use crate::report::ClusteringReport;

/// Top-k eigenpairs of the weighted kernel matrix, row per point.
#[derive(Debug, Clone)]
pub struct SpectralEmbedding {
    /// Descending eigenvalues, `k` of them.
    pub eigenvalues: Vec<f64>,
    /// Eigenvector columns (orthonormal within 1e-8), each of length n.
    pub basis: Vec<Vec<f64>>,
    /// Kernel evaluations spent: exactly `n (n + 1) / 2`.
    pub kernel_evals: u64,
}

impl SpectralEmbedding {
    pub fn n(&self) -> usize {
        self.basis.first().map_or(0, Vec::len)
    }

    pub fn k(&self) -> usize {
        self.basis.len()
    }

    /// Embedding rows normalized to unit length, as a dataset ready for
    /// the partition step. The original algorithm statement skips this
    /// normalization; the cited method needs it so that points of one
    /// graph component land on one spot of the unit sphere, and this
    /// implementation follows the method.
    pub fn row_points(&self) -> Result<Dataset> {
        let n = self.n();
        let k = self.k();
        let mut values = Vec::with_capacity(n * k);
        for i in 0..n {
            let row: Vec<f64> = self.basis.iter().map(|col| col[i]).collect();
            let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
            if norm <= f64::MIN_POSITIVE {
                return Err(Error::DegenerateRow { point: i });
            }
            values.extend(row.iter().map(|v| v / norm));
        }
        Dataset::new(values, k)
    }
}

/// `W^(1/2) K W^(1/2)` plus the kernel evaluation count.
fn weighted_kernel(data: &Dataset, sigma: f64) -> Result<(SymMatrix, u64)> {
    let km = kernel_matrix(KernelSpec::Gaussian { sigma }, data)?;
    let degrees = km.matrix.row_sums();
    // Gaussian diagonal is 1, so every degree is >= 1.
    let scale: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    Ok((km.matrix.scaled_both_sides(&scale), km.evals))
}

/// The matrix whose top-k eigenvectors form the embedding; equal to the
/// normalized adjacency of the gaussian similarity graph.
pub fn njw_matrix(data: &Dataset, sigma: f64) -> Result<SymMatrix> {
    Ok(weighted_kernel(data, sigma)?.0)
}

/// Embed the data as the top-k eigenvector rows.
pub fn njw_embed(data: &Dataset, k: usize, sigma: f64) -> Result<SpectralEmbedding> {
    if k == 0 || data.n() < k {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n, got k = {k} with n = {}",
            data.n()
        )));
    }
    let (m, kernel_evals) = weighted_kernel(data, sigma)?;
    let eig = sym_eig(&m, k)?;
    Ok(SpectralEmbedding {
        eigenvalues: eig.values,
        basis: eig.vectors,
        kernel_evals,
    })
}

/// Embed, then run k-means on the embedding rows with seeded restarts,
/// keeping the partition with the lowest final objective.
pub fn njw_fit(
    data: &Dataset,
    k: usize,
    sigma: f64,
    cfg: &RunConfig,
    restarts: usize,
) -> Result<ClusteringReport> {
    if restarts == 0 {
        return Err(Error::invalid("need at least one restart"));
    }
    let embedding = njw_embed(data, k, sigma)?;
    let rows = embedding.row_points()?;
    let mut best: Option<KmeansFit> = None;
    for r in 0..restarts {
        let seed = crate::rng::derive_seed(cfg.seed, r as u64);
        let run_cfg = RunConfig { seed, ..*cfg };
        let fit = kmeans::fit(&rows, k, &run_cfg, &KmeansInit::Forgy)?;
        let better = match &best {
            None => true,
            Some(b) => fit.final_objective() < b.final_objective(),
        };
        if better {
            best = Some(fit);
        }
    }
    let fit = best.expect("restarts >= 1");
    let mut report = ClusteringReport::new("njw-sc", fit.assignment.clone())
        .with_param("k", k as f64)
        .with_param("sigma", sigma)
        .with_param("restarts", restarts as f64);
    report.eigenvalues = Some(embedding.eigenvalues.clone());
    report.objective_trace = Some(fit.trace.objective.clone());
    report.iterations = fit.trace.iterations;
    Ok(report)
}
