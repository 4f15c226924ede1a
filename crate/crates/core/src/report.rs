//! Run summary shared by every fit.

use crate::assign::HardAssignment;

/// What a clustering run produced, uniform across algorithm families so
/// callers can compare runs without knowing which family ran.
#[derive(Debug, Clone)]
pub struct ClusteringReport {
    /// Algorithm name as exposed on the command line.
    pub algorithm: String,
    /// Hyperparameters the run actually used.
    pub params: Vec<(String, f64)>,
    /// Final hard assignment (outliers labeled `-1`).
    pub assignment: HardAssignment,
    /// Cluster representatives, when the family defines them (centroids
    /// for k-means, modes for mean shift).
    pub centers: Option<Vec<Vec<f64>>>,
    /// Log-likelihood after each EM iteration.
    pub loglik_trace: Option<Vec<f64>>,
    /// Objective after each assign/update round.
    pub objective_trace: Option<Vec<f64>>,
    /// Eigenvalues consumed by spectral methods, descending.
    pub eigenvalues: Option<Vec<f64>>,
    /// Outer iterations performed (largest per-point climb count for the
    /// mode-seeking family).
    pub iterations: usize,
    /// Points labeled `-1`.
    pub outlier_count: usize,
}

impl ClusteringReport {
    /// A report with only the fields every family shares; callers fill in
    /// the family-specific diagnostics.
    pub fn new(algorithm: &str, assignment: HardAssignment) -> Self {
        let outlier_count = assignment.outlier_count();
        ClusteringReport {
            algorithm: algorithm.to_string(),
            params: Vec::new(),
            assignment,
            centers: None,
            loglik_trace: None,
            objective_trace: None,
            eigenvalues: None,
            iterations: 0,
            outlier_count,
        }
    }

    pub fn with_param(mut self, name: &str, value: f64) -> Self {
        self.params.push((name.to_string(), value));
        self
    }
}
