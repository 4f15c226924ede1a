//! Kernel functions, the kernel matrix, and weighted kernel k-means.
//!
//! Weighted kernel k-means runs Lloyd iteration in the feature space of a
//! kernel without ever materializing mapped points. The implicit cluster
//! mean is `m_c = sum_{j in c} w_j phi(x_j) / s_c` with `s_c` the cluster's
//! total weight, and the point-to-mean distance expands to kernel sums:
//!
//! ```text
//! ||phi(x_i) - m_c||^2 = K_ii - 2 sum_{j in c} w_j K_ij / s_c
//!                        + sum_{j,l in c} w_j w_l K_jl / s_c^2
//! ```
//!
//! The last term does not depend on `i`, so it is computed once per
//! cluster per iteration. Minimizing the weighted sum of these distances
//! is equivalent to maximizing `Tr(Y' W^(1/2) K W^(1/2) Y)` over the
//! normalized assignment matrix Y, the same trace objective that spectral
//! clustering relaxes; `wkk_trace_objective` computes that form literally
//! so tests can check the identity between the two routes.

use crate::assign::HardAssignment;
use crate::config::RunConfig;
use crate::data::{distance, squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;
use crate::rng::RngStream;

/// Which kernel to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelSpec {
    /// `exp(-||x - y||^2 / (2 sigma^2))`, `sigma > 0`.
    Gaussian { sigma: f64 },
    /// `(x . y + c)^b`, `b >= 1`.
    Polynomial { c: f64, b: f64 },
    /// 1 if `||x - y|| <= eps` (boundary inclusive), else 0; `eps > 0`.
    Heaviside { eps: f64 },
    /// Plain dot product.
    Linear,
}

impl KernelSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Gaussian { sigma } if sigma <= 0.0 => {
                Err(Error::invalid("gaussian kernel needs sigma > 0"))
            }
            KernelSpec::Heaviside { eps } if eps <= 0.0 => {
                Err(Error::invalid("heaviside kernel needs eps > 0"))
            }
            KernelSpec::Polynomial { b, .. } if b < 1.0 => {
                Err(Error::invalid("polynomial kernel needs b >= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Evaluate the kernel on one pair of points.
pub fn kernel_eval(spec: KernelSpec, x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    match spec {
        KernelSpec::Gaussian { sigma } => {
            (-squared_distance(x, y) / (2.0 * sigma * sigma)).exp()
        }
        KernelSpec::Polynomial { c, b } => {
            let dot: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
            (dot + c).powf(b)
        }
        KernelSpec::Heaviside { eps } => {
            if eps - distance(x, y) >= 0.0 {
                1.0
            } else {
                0.0
            }
        }
        KernelSpec::Linear => x.iter().zip(y).map(|(a, b)| a * b).sum(),
    }
}

/// Kernel values over all point pairs, with the evaluation count exposed.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub matrix: SymMatrix,
    pub spec: KernelSpec,
    /// Kernel evaluations performed: exactly `n (n + 1) / 2`.
    pub evals: u64,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.matrix.order()
    }
}

/// Evaluate the kernel on every unordered pair, exploiting symmetry.
pub fn kernel_matrix(spec: KernelSpec, data: &Dataset) -> Result<KernelMatrix> {
    spec.validate()?;
    let mut evals = 0u64;
    let matrix = SymMatrix::from_fn(data.n(), |i, j| {
        evals += 1;
        kernel_eval(spec, data.point(i), data.point(j))
    });
    Ok(KernelMatrix {
        matrix,
        spec,
        evals,
    })
}

/// Point weights plus a hard assignment, with per-cluster total weights.
#[derive(Debug, Clone)]
pub struct WkkState {
    pub weights: Vec<f64>,
    pub assignment: HardAssignment,
    /// `s_c`, total weight per cluster id.
    pub cluster_weights: Vec<f64>,
}

impl WkkState {
    pub fn new(weights: Vec<f64>, assignment: HardAssignment) -> Result<Self> {
        if weights.len() != assignment.n() {
            return Err(Error::LengthMismatch {
                expected: assignment.n(),
                got: weights.len(),
            });
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::invalid("weights must be finite and non-negative"));
        }
        if assignment.outlier_count() > 0 {
            return Err(Error::invalid("kernel k-means assignments have no outliers"));
        }
        let mut cluster_weights = vec![0.0; assignment.k()];
        for (i, &c) in assignment.labels().iter().enumerate() {
            cluster_weights[c as usize] += weights[i];
        }
        for (c, (&s, size)) in cluster_weights
            .iter()
            .zip(assignment.cluster_sizes())
            .enumerate()
        {
            if size > 0 && s <= 0.0 {
                return Err(Error::invalid(format!(
                    "cluster {c} has members but zero total weight"
                )));
            }
        }
        Ok(WkkState {
            weights,
            assignment,
            cluster_weights,
        })
    }
}

/// `||phi(x_i) - m_c||^2` via the kernel expansion above.
pub fn wkk_point_distance(k: &KernelMatrix, state: &WkkState, i: usize, c: usize) -> Result<f64> {
    let members = state.assignment.members(c);
    if members.is_empty() {
        return Err(Error::EmptyCluster { cluster: c });
    }
    let s_c = state.cluster_weights[c];
    let cross: f64 = members
        .iter()
        .map(|&j| state.weights[j] * k.matrix.get(i, j))
        .sum();
    let mut pair = 0.0;
    for &j in &members {
        for &l in &members {
            pair += state.weights[j] * state.weights[l] * k.matrix.get(j, l);
        }
    }
    Ok(k.matrix.get(i, i) - 2.0 * cross / s_c + pair / (s_c * s_c))
}

/// Weighted sum of point-to-own-mean distances for `state`'s assignment.
pub fn wkk_objective(k: &KernelMatrix, state: &WkkState) -> Result<f64> {
    let stats = ClusterStats::compute(k, &state.weights, state.assignment.labels())?;
    Ok(stats.objective(k, &state.weights, state.assignment.labels()))
}

/// Per-iteration cluster sums: members, total weight, and the cached
/// self-similarity term `sum_{j,l in c} w_j w_l K_jl / s_c^2`.
struct ClusterStats {
    members: Vec<Vec<usize>>,
    total_weight: Vec<f64>,
    self_sim: Vec<f64>,
}

impl ClusterStats {
    fn compute(k: &KernelMatrix, weights: &[f64], labels: &[i64]) -> Result<ClusterStats> {
        let clusters = labels.iter().copied().max().unwrap_or(-1) + 1;
        let clusters = clusters as usize;
        let mut members = vec![Vec::new(); clusters];
        for (i, &c) in labels.iter().enumerate() {
            members[c as usize].push(i);
        }
        let mut total_weight = vec![0.0; clusters];
        let mut self_sim = vec![0.0; clusters];
        for c in 0..clusters {
            if members[c].is_empty() {
                return Err(Error::EmptyCluster { cluster: c });
            }
            let s: f64 = members[c].iter().map(|&i| weights[i]).sum();
            if s <= 0.0 {
                return Err(Error::invalid(format!(
                    "cluster {c} has members but zero total weight"
                )));
            }
            let mut pair = 0.0;
            for &j in &members[c] {
                for &l in &members[c] {
                    pair += weights[j] * weights[l] * k.matrix.get(j, l);
                }
            }
            total_weight[c] = s;
            self_sim[c] = pair / (s * s);
        }
        Ok(ClusterStats {
            members,
            total_weight,
            self_sim,
        })
    }

    fn point_distance(&self, k: &KernelMatrix, weights: &[f64], i: usize, c: usize) -> f64 {
        let cross: f64 = self.members[c]
            .iter()
            .map(|&j| weights[j] * k.matrix.get(i, j))
            .sum();
        k.matrix.get(i, i) - 2.0 * cross / self.total_weight[c] + self.self_sim[c]
    }

    fn objective(&self, k: &KernelMatrix, weights: &[f64], labels: &[i64]) -> f64 {
        labels
            .iter()
            .enumerate()
            .map(|(i, &c)| weights[i] * self.point_distance(k, weights, i, c as usize))
            .sum()
    }
}

/// Per-iteration record of a weighted kernel k-means run. Mirrors the
/// k-means trace so the two trajectories can be compared directly.
#[derive(Debug, Clone)]
pub struct WkkFit {
    pub assignment: HardAssignment,
    pub objective: Vec<f64>,
    pub assignments: Vec<HardAssignment>,
    pub iterations: usize,
    pub converged: bool,
}

/// Seeded balanced partition: shuffle points, deal them round-robin.
pub fn balanced_random_assignment(n: usize, k: usize, rng: &mut RngStream) -> HardAssignment {
    let perm = rng.permutation(n);
    let mut labels = vec![0i64; n];
    for (pos, &i) in perm.iter().enumerate() {
        labels[i] = (pos % k) as i64;
    }
    HardAssignment::new(labels).expect("labels are non-negative")
}

/// Lloyd iteration on implicit feature-space means.
///
/// An empty cluster is refilled with the point farthest from its own
/// implicit mean, skipping sole members (moving those would just relocate
/// the hole).
pub fn wkk_fit(
    k: &KernelMatrix,
    weights: &[f64],
    clusters: usize,
    cfg: &RunConfig,
    init: &HardAssignment,
) -> Result<WkkFit> {
    let n = k.n();
    if clusters == 0 || n < clusters {
        return Err(Error::invalid(format!(
            "need 1 <= clusters <= n, got {clusters} with n = {n}"
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    if init.n() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: init.n(),
        });
    }
    if weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: weights.len(),
        });
    }
    if init.outlier_count() > 0 || init.k() > clusters {
        return Err(Error::invalid(
            "initial assignment must use cluster ids 0..clusters with no outliers",
        ));
    }
    let mut current = init.labels().to_vec();
    for c in 0..clusters {
        if !current.contains(&(c as i64)) {
            return Err(Error::EmptyCluster { cluster: c });
        }
    }
    let mut assignments: Vec<HardAssignment> = Vec::new();
    let mut objective = Vec::new();
    let mut converged = false;
    while assignments.len() < cfg.max_iters {
        let stats = ClusterStats::compute(k, weights, &current)?;
        let mut labels = Vec::with_capacity(n);
        for i in 0..n {
            let mut best = 0usize;
            let mut best_d = stats.point_distance(k, weights, i, 0);
            for c in 1..clusters {
                let d = stats.point_distance(k, weights, i, c);
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            labels.push(best as i64);
        }
        fill_empty_clusters(k, weights, &mut labels, clusters)?;
        let next = HardAssignment::new(labels)?;
        let repeated = assignments.last() == Some(&next);
        assignments.push(next.clone());
        if repeated {
            converged = true;
            break;
        }
        let next_stats = ClusterStats::compute(k, weights, next.labels())?;
        objective.push(next_stats.objective(k, weights, next.labels()));
        current = next.labels().to_vec();
    }
    let assignment = assignments.last().expect("at least one iteration").clone();
    Ok(WkkFit {
        assignment,
        objective,
        iterations: assignments.len(),
        assignments,
        converged,
    })
}

fn fill_empty_clusters(
    k: &KernelMatrix,
    weights: &[f64],
    labels: &mut [i64],
    clusters: usize,
) -> Result<()> {
    loop {
        let mut counts = vec![0usize; clusters];
        for &c in labels.iter() {
            counts[c as usize] += 1;
        }
        let Some(empty) = (0..clusters).find(|&c| counts[c] == 0) else {
            return Ok(());
        };
        let stats = ClusterStats::compute(k, weights, labels)?;
        let mut pick = None;
        let mut pick_d = f64::NEG_INFINITY;
        for (i, &c) in labels.iter().enumerate() {
            if counts[c as usize] < 2 {
                continue;
            }
            let d = stats.point_distance(k, weights, i, c as usize);
            if d > pick_d {
                pick = Some(i);
                pick_d = d;
            }
        }
        let Some(i) = pick else {
            return Err(Error::EmptyCluster { cluster: empty });
        };
        labels[i] = empty as i64;
    }
}

/// `Tr(Y' W^(1/2) K W^(1/2) Y)` with Y the normalized one-hot assignment
/// matrix (entries `sqrt(w_i / s_c)`), computed by building Y and the
/// scaled matrix literally. Y's columns are checked to be orthonormal
/// within 1e-10.
pub fn wkk_trace_objective(
    k: &KernelMatrix,
    weights: &[f64],
    assign: &HardAssignment,
) -> Result<f64> {
    let n = k.n();
    if assign.n() != n || weights.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            got: assign.n().min(weights.len()),
        });
    }
    let state = WkkState::new(weights.to_vec(), assign.clone())?;
    let root_w: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
    let scaled = k.matrix.scaled_both_sides(&root_w);
    let mut trace = 0.0;
    for c in 0..assign.k() {
        let members = assign.members(c);
        if members.is_empty() {
            return Err(Error::EmptyCluster { cluster: c });
        }
        let s_c = state.cluster_weights[c];
        let mut y = vec![0.0; n];
        for &i in &members {
            y[i] = (weights[i] / s_c).sqrt();
        }
        let norm: f64 = y.iter().map(|v| v * v).sum();
        debug_assert!(
            (norm - 1.0).abs() <= 1e-10,
            "assignment column {c} not unit: {norm}"
        );
        let my = scaled.matvec(&y);
        trace += y.iter().zip(&my).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(trace)
}
