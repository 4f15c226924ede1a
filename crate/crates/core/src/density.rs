//! Density-based clustering: DBSCAN in three equivalent formulations and
//! Mean Shift, plus the kernel density estimation that connects them.
//!
//! The graph formulation finds core points (at least `min_pts` neighbors
//! within `eps`, self counted) and clusters them through connected
//! components of the core-core eps-graph. The spectral formulation
//! filters the heaviside similarity graph instead and reads the same
//! components from the eigenvalue-one eigenspace. The climbing
//! formulation lets every point walk uphill on a kernel density estimate
//! until it reaches core density; Mean Shift is the same walk run all
//! the way to a local maximum. Equivalences between the formulations are
//! enforced by tests, not assumed.
//!
//! The climb update `x <- mean(N_eps(x))` is the mean shift step with a
//! flat kernel of radius `eps` (bandwidth folded into the neighborhood),
//! and moves in the direction of the density gradient:
//! `grad f(x) = (2 / h^2) f_flat(x) (mean - x)` for the Epanechnikov
//! estimate `f`.

use crate::assign::HardAssignment;
use crate::data::{distance, squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::graph::{build_graph, eigenone_components, NodeLabel};
use crate::kernels::KernelSpec;
use crate::linalg::SymMatrix;
use crate::report::ClusteringReport;

/// Hard cap on mean shift iterations per point.
pub const CLIMB_MAX_ITERS: usize = 500;

/// DBSCAN radius and density threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbscanParams {
    pub eps: f64,
    pub min_pts: usize,
}

impl DbscanParams {
    pub fn new(eps: f64, min_pts: usize) -> Result<Self> {
        if !(eps > 0.0) {
            return Err(Error::invalid(format!("eps must be positive, got {eps}")));
        }
        if min_pts == 0 {
            return Err(Error::invalid("min_pts must be at least 1"));
        }
        Ok(DbscanParams { eps, min_pts })
    }
}

/// Indices of dataset points within `eps` of `x`, boundary inclusive.
/// When `x` is itself a dataset point its own index is included.
pub fn eps_neighborhood(data: &Dataset, x: &[f64], eps: f64) -> Vec<usize> {
    debug_assert!(eps > 0.0);
    (0..data.n())
        .filter(|&j| distance(x, data.point(j)) <= eps)
        .collect()
}

/// Precomputed pairwise distances for one dataset and radius.
#[derive(Debug, Clone)]
pub struct NeighborhoodData {
    pub dist: SymMatrix,
    pub eps: f64,
    /// Distance evaluations spent: exactly `n (n - 1) / 2`.
    pub distance_evals: u64,
}

pub fn neighborhoods(data: &Dataset, eps: f64) -> NeighborhoodData {
    debug_assert!(eps > 0.0);
    let mut distance_evals = 0u64;
    let dist = SymMatrix::from_fn(data.n(), |i, j| {
        if i == j {
            0.0
        } else {
            distance_evals += 1;
            distance(data.point(i), data.point(j))
        }
    });
    NeighborhoodData {
        dist,
        eps,
        distance_evals,
    }
}

impl NeighborhoodData {
    pub fn n(&self) -> usize {
        self.dist.order()
    }

    pub fn neighbors_of(&self, i: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&j| self.dist.get(i, j) <= self.eps)
            .collect()
    }

    /// `|N_eps(x_i)|`, self counted.
    pub fn neighbor_count(&self, i: usize) -> usize {
        (0..self.n())
            .filter(|&j| self.dist.get(i, j) <= self.eps)
            .count()
    }
}

/// Nearest core point of `i` and its distance, ties toward the lower
/// index.
fn nearest_core(nd: &NeighborhoodData, core: &[bool], i: usize) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for j in 0..nd.n() {
        if !core[j] || j == i {
            continue;
        }
        let d = nd.dist.get(i, j);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((j, d));
        }
    }
    best
}

/// DBSCAN via depth-first search on the core-core eps-graph.
pub fn dbscan_graph(data: &Dataset, p: DbscanParams) -> Result<ClusteringReport> {
    let n = data.n();
    let nd = neighborhoods(data, p.eps);
    let core: Vec<bool> = (0..n).map(|i| nd.neighbor_count(i) >= p.min_pts).collect();
    let mut labels = vec![-1i64; n];
    let mut next = 0i64;
    let mut stack = Vec::new();
    for start in 0..n {
        if !core[start] || labels[start] >= 0 {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && labels[j] < 0 && nd.dist.get(i, j) <= p.eps {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        if let Some((j, d)) = nearest_core(&nd, &core, i) {
            if d <= p.eps {
                labels[i] = labels[j];
            }
        }
    }
    let assignment = HardAssignment::new(labels)?;
    Ok(ClusteringReport::new("dbscan", assignment)
        .with_param("eps", p.eps)
        .with_param("min_pts", p.min_pts as f64)
        .with_param("distance_evals", nd.distance_evals as f64))
}

/// DBSCAN via the filtered heaviside graph and its eigenvalue-one
/// eigenspace.
///
/// Node filter: core when the degree (self included) reaches `min_pts`,
/// outlier when the node has no neighbor at all, unprocessed otherwise.
/// Degrees are recomputed on the filtered graph before the
/// eigendecomposition. Border resolution matches `dbscan_graph`.
pub fn dbscan_spectral(data: &Dataset, p: DbscanParams) -> Result<ClusteringReport> {
    let n = data.n();
    let mut g = build_graph(data, KernelSpec::Heaviside { eps: p.eps })?;
    for i in 0..n {
        // Heaviside degrees are exact small integers.
        let count = g.degrees[i].round() as usize;
        g.labels[i] = if count >= p.min_pts {
            NodeLabel::Core
        } else if count == 1 {
            NodeLabel::Outlier
        } else {
            NodeLabel::Unprocessed
        };
    }
    let core_idx: Vec<usize> = (0..n).filter(|&i| g.labels[i] == NodeLabel::Core).collect();
    let mut labels = vec![-1i64; n];
    if !core_idx.is_empty() {
        let filtered = g.subgraph(&core_idx)?;
        let components = eigenone_components(&filtered)?;
        for (t, &i) in core_idx.iter().enumerate() {
            labels[i] = components.label(t);
        }
        let core_flags: Vec<bool> = (0..n).map(|i| g.labels[i] == NodeLabel::Core).collect();
        for i in 0..n {
            if core_flags[i] {
                continue;
            }
            let mut best: Option<(usize, f64)> = None;
            for &j in &core_idx {
                let d = distance(data.point(i), data.point(j));
                if best.is_none_or(|(_, bd)| d < bd) {
                    best = Some((j, d));
                }
            }
            if let Some((j, d)) = best {
                if d <= p.eps {
                    labels[i] = labels[j];
                }
            }
        }
    }
    let assignment = HardAssignment::new(labels)?;
    Ok(ClusteringReport::new("dbscan-spectral", assignment)
        .with_param("eps", p.eps)
        .with_param("min_pts", p.min_pts as f64)
        .with_param("kernel_evals", g.kernel_evals as f64))
}

/// Kernel profile for density estimation; the argument is the squared
/// scaled distance `t = ||(x - x_i) / h||^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KdeProfile {
    /// 1 on `t <= 1`, else 0.
    Flat,
    /// `exp(-t / 2)`.
    Gaussian,
    /// `max(0, 1 - t)`; its derivative is the negative flat profile.
    Epanechnikov,
}

impl KdeProfile {
    fn eval(self, t: f64) -> f64 {
        match self {
            KdeProfile::Flat => {
                if t <= 1.0 {
                    1.0
                } else {
                    0.0
                }
            }
            KdeProfile::Gaussian => (-t / 2.0).exp(),
            KdeProfile::Epanechnikov => (1.0 - t).max(0.0),
        }
    }
}

/// `f(x) = (1 / (n h^d)) sum_i kappa(||(x - x_i) / h||^2)`.
pub fn kde(data: &Dataset, x: &[f64], profile: KdeProfile, h: f64) -> f64 {
    debug_assert!(h > 0.0);
    let total: f64 = (0..data.n())
        .map(|i| profile.eval(squared_distance(x, data.point(i)) / (h * h)))
        .sum();
    total / (data.n() as f64 * h.powi(data.d() as i32))
}

fn neighborhood_mean(data: &Dataset, x: &[f64], eps: f64) -> Result<Vec<f64>> {
    let nbrs = eps_neighborhood(data, x, eps);
    if nbrs.is_empty() {
        return Err(Error::EmptyNeighborhood);
    }
    let mut mean = vec![0.0; data.d()];
    for &j in &nbrs {
        for (m, v) in mean.iter_mut().zip(data.point(j)) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= nbrs.len() as f64;
    }
    Ok(mean)
}

/// Mean shift vector `m(x) = x - mean(N_eps(x))`; the climb target is
/// `x - m(x)`.
pub fn mean_shift_vector(data: &Dataset, x: &[f64], eps: f64) -> Result<Vec<f64>> {
    let mean = neighborhood_mean(data, x, eps)?;
    Ok(x.iter().zip(&mean).map(|(a, b)| a - b).collect())
}

/// Outcome of running the climbing procedure on every point. The
/// original dataset is never modified; all walks read from it.
#[derive(Debug, Clone)]
pub struct ClimbState {
    /// Final position of every point's walk.
    pub climbed: Vec<Vec<f64>>,
    /// Accepted moves per point.
    pub iterations: Vec<usize>,
    /// Whether the walk stopped because the density target was met
    /// (always false without a target).
    pub reached_density: Vec<bool>,
    /// Total neighborhood scans, at most `n * CLIMB_MAX_ITERS`.
    pub neighborhood_scans: u64,
}

/// Walk every point uphill: `x <- mean(N_eps(x))` against the original
/// dataset until the density target is met (checked before each move),
/// the step falls to the fixed-point threshold `1e-6 * eps`, or
/// `CLIMB_MAX_ITERS` moves were made.
pub fn climb(data: &Dataset, eps: f64, density_target: Option<usize>) -> Result<ClimbState> {
    if !(eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive, got {eps}")));
    }
    let delta = 1e-6 * eps;
    let n = data.n();
    let mut climbed = Vec::with_capacity(n);
    let mut iterations = Vec::with_capacity(n);
    let mut reached_density = Vec::with_capacity(n);
    let mut neighborhood_scans = 0u64;
    for i in 0..n {
        let mut x = data.point(i).to_vec();
        let mut moves = 0usize;
        let mut reached = false;
        loop {
            let nbrs = eps_neighborhood(data, &x, eps);
            neighborhood_scans += 1;
            if nbrs.is_empty() {
                return Err(Error::EmptyNeighborhood);
            }
            if let Some(target) = density_target {
                if nbrs.len() >= target {
                    reached = true;
                    break;
                }
            }
            let mut mean = vec![0.0; data.d()];
            for &j in &nbrs {
                for (m, v) in mean.iter_mut().zip(data.point(j)) {
                    *m += v;
                }
            }
            for m in &mut mean {
                *m /= nbrs.len() as f64;
            }
            let step = distance(&mean, &x);
            x = mean;
            if step <= delta {
                break;
            }
            moves += 1;
            if moves == CLIMB_MAX_ITERS {
                break;
            }
        }
        climbed.push(x);
        iterations.push(moves);
        reached_density.push(reached);
    }
    Ok(ClimbState {
        climbed,
        iterations,
        reached_density,
        neighborhood_scans,
    })
}

/// Connected components of the climbed points under eps-edges, ids by
/// first-visited point.
fn climbed_partition(state: &ClimbState, eps: f64) -> Vec<i64> {
    let n = state.climbed.len();
    let mut labels = vec![-1i64; n];
    let mut next = 0i64;
    let mut stack = Vec::new();
    for start in 0..n {
        if labels[start] >= 0 {
            continue;
        }
        labels[start] = next;
        stack.push(start);
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if labels[j] < 0 && distance(&state.climbed[i], &state.climbed[j]) <= eps {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    labels
}

fn apply_size_one_rule(labels: &mut [i64], outlier_if: impl Fn(usize) -> bool) {
    let max = labels.iter().copied().max().unwrap_or(-1);
    let mut sizes = vec![0usize; (max + 1) as usize];
    for &l in labels.iter() {
        sizes[l as usize] += 1;
    }
    for (i, l) in labels.iter_mut().enumerate() {
        if sizes[*l as usize] == 1 && outlier_if(i) {
            *l = -1;
        }
    }
}

/// DBSCAN by climbing: every point walks uphill until it reaches core
/// density, then clusters are the eps-components of the walked points.
///
/// A size-one component is an outlier only when its point never reached
/// the density target; a point that is dense on its own is a genuine
/// single-member cluster, which keeps this formulation consistent with
/// `dbscan_graph` at `min_pts = 1`.
pub fn dbscan_climb(data: &Dataset, p: DbscanParams) -> Result<ClusteringReport> {
    let state = climb(data, p.eps, Some(p.min_pts))?;
    let mut labels = climbed_partition(&state, p.eps);
    apply_size_one_rule(&mut labels, |i| !state.reached_density[i]);
    let assignment = HardAssignment::new(labels)?.canonicalize();
    let mut report = ClusteringReport::new("dbscan-climb", assignment)
        .with_param("eps", p.eps)
        .with_param("min_pts", p.min_pts as f64);
    report.iterations = state.iterations.iter().copied().max().unwrap_or(0);
    Ok(report)
}

/// Mean Shift: every point walks to a local density maximum, clusters
/// are the eps-components of the fixed points, size-one components are
/// outliers, and each cluster's center is the mean of its walked points
/// (the shared mode).
pub fn mean_shift(data: &Dataset, eps: f64) -> Result<ClusteringReport> {
    let state = climb(data, eps, None)?;
    let mut labels = climbed_partition(&state, eps);
    apply_size_one_rule(&mut labels, |_| true);
    let assignment = HardAssignment::new(labels)?.canonicalize();
    let mut centers = vec![vec![0.0; data.d()]; assignment.k()];
    let mut counts = vec![0usize; assignment.k()];
    for (i, &l) in assignment.labels().iter().enumerate() {
        if l < 0 {
            continue;
        }
        counts[l as usize] += 1;
        for (c, v) in centers[l as usize].iter_mut().zip(&state.climbed[i]) {
            *c += v;
        }
    }
    for (center, &count) in centers.iter_mut().zip(&counts) {
        for c in center.iter_mut() {
            *c /= count as f64;
        }
    }
    let mut report = ClusteringReport::new("meanshift", assignment).with_param("eps", eps);
    report.centers = Some(centers);
    report.iterations = state.iterations.iter().copied().max().unwrap_or(0);
    Ok(report)
}
