//! Vanilla k-means and its bridge to the spherical-mixture limit of EM.
//!
//! Lloyd iteration: assign each point to its nearest centroid (squared
//! Euclidean distance, ties to the lower index), then move each centroid
//! to the mean of its points. Iteration stops when the assignment repeats
//! exactly, which guarantees finite termination since the objective
//! strictly decreases between distinct assignments.
//!
//! The bridge: constrain a GMM to spherical covariances `eps * I` and the
//! responsibilities collapse onto the nearest-centroid indicator as
//! `eps -> 0`, independently of the mixing weights. k-means is EM in that
//! limit. `spherical_responsibilities` computes the constrained E step so
//! tests can drive `eps` down and watch the argmax converge to
//! `assign_step`.

use crate::assign::{HardAssignment, SoftAssignment};
use crate::config::RunConfig;
use crate::data::{squared_distance, Dataset};
use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Cluster centers for one k-means state.
#[derive(Debug, Clone, PartialEq)]
pub struct Centroids {
    points: Vec<Vec<f64>>,
}

impl Centroids {
    pub fn new(points: Vec<Vec<f64>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("need at least one centroid"));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::invalid("centroids must share one dimension"));
        }
        Ok(Centroids { points })
    }

    /// Means of a fully assigned dataset, one per cluster id.
    pub fn from_assignment(data: &Dataset, assign: &HardAssignment) -> Result<Self> {
        if assign.n() != data.n() {
            return Err(Error::LengthMismatch {
                expected: data.n(),
                got: assign.n(),
            });
        }
        let k = assign.k();
        let mut sums = vec![vec![0.0; data.d()]; k];
        let mut counts = vec![0usize; k];
        for (i, x) in data.points().enumerate() {
            let c = assign.label(i);
            if c < 0 {
                return Err(Error::invalid("assignment with outliers has no centroids"));
            }
            counts[c as usize] += 1;
            for (s, v) in sums[c as usize].iter_mut().zip(x) {
                *s += v;
            }
        }
        for (c, count) in counts.iter().enumerate() {
            if *count == 0 {
                return Err(Error::EmptyCluster { cluster: c });
            }
            for s in &mut sums[c] {
                *s /= *count as f64;
            }
        }
        Centroids::new(sums)
    }

    pub fn k(&self) -> usize {
        self.points.len()
    }

    pub fn d(&self) -> usize {
        self.points[0].len()
    }

    pub fn center(&self, c: usize) -> &[f64] {
        &self.points[c]
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.points
    }
}

/// How `fit` chooses its starting centroids.
#[derive(Debug, Clone)]
pub enum KmeansInit {
    /// k distinct data points, seeded from the run config (Forgy).
    Forgy,
    /// Caller-supplied centroids.
    Explicit(Centroids),
}

/// Per-iteration record of a k-means run.
#[derive(Debug, Clone)]
pub struct KmeansTrace {
    /// Objective after each update step, under the assignment that
    /// produced it.
    pub objective: Vec<f64>,
    /// Every assignment computed, in order; the last two entries are equal
    /// exactly when the run converged.
    pub assignments: Vec<HardAssignment>,
    pub iterations: usize,
    pub converged: bool,
}

/// Result of a k-means run.
#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub centroids: Centroids,
    pub assignment: HardAssignment,
    pub trace: KmeansTrace,
}

impl KmeansFit {
    /// Objective under the final assignment.
    pub fn final_objective(&self) -> f64 {
        *self
            .trace
            .objective
            .last()
            .expect("fit records at least one objective")
    }
}

/// Nearest-centroid assignment; ties break toward the lower index.
pub fn assign_step(centroids: &Centroids, data: &Dataset) -> HardAssignment {
    debug_assert_eq!(centroids.d(), data.d());
    let labels = data
        .points()
        .map(|x| {
            let mut best = 0usize;
            let mut best_d = squared_distance(x, centroids.center(0));
            for c in 1..centroids.k() {
                let d = squared_distance(x, centroids.center(c));
                if d < best_d {
                    best = c;
                    best_d = d;
                }
            }
            best as i64
        })
        .collect();
    HardAssignment::new(labels).expect("labels are non-negative")
}

/// Mean update. An empty cluster keeps `k` alive by jumping to the point
/// farthest from its current centroid (ties to the lower point index).
pub fn update_step(data: &Dataset, assign: &HardAssignment, current: &Centroids) -> Centroids {
    debug_assert_eq!(assign.n(), data.n());
    let k = current.k();
    let d = data.d();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (i, x) in data.points().enumerate() {
        let c = assign.label(i) as usize;
        counts[c] += 1;
        for (s, v) in sums[c].iter_mut().zip(x) {
            *s += v;
        }
    }
    let mut points = Vec::with_capacity(k);
    for c in 0..k {
        if counts[c] == 0 {
            let mut far = 0usize;
            let mut far_d = f64::NEG_INFINITY;
            for (i, x) in data.points().enumerate() {
                let dist = squared_distance(x, current.center(c));
                if dist > far_d {
                    far = i;
                    far_d = dist;
                }
            }
            points.push(data.point(far).to_vec());
        } else {
            for s in &mut sums[c] {
                *s /= counts[c] as f64;
            }
            points.push(std::mem::take(&mut sums[c]));
        }
    }
    Centroids { points }
}

/// Sum of squared distances from each point to its assigned centroid.
pub fn objective(data: &Dataset, centroids: &Centroids, assign: &HardAssignment) -> f64 {
    data.points()
        .enumerate()
        .map(|(i, x)| squared_distance(x, centroids.center(assign.label(i) as usize)))
        .sum()
}

/// Lloyd iteration until the assignment repeats or `cfg.max_iters`.
pub fn fit(data: &Dataset, k: usize, cfg: &RunConfig, init: &KmeansInit) -> Result<KmeansFit> {
    if k == 0 || data.n() < k {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n, got k = {k} with n = {}",
            data.n()
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    let mut centroids = match init {
        KmeansInit::Forgy => {
            let mut rng = RngStream::new(cfg.seed);
            let picks = rng.distinct_indices(k, data.n());
            Centroids::new(picks.into_iter().map(|i| data.point(i).to_vec()).collect())?
        }
        KmeansInit::Explicit(c) => {
            if c.k() != k || c.d() != data.d() {
                return Err(Error::invalid(
                    "explicit centroids must match k and data dimension",
                ));
            }
            c.clone()
        }
    };
    let mut assignments: Vec<HardAssignment> = Vec::new();
    let mut objective_trace = Vec::new();
    let mut converged = false;
    while assignments.len() < cfg.max_iters {
        let assign = assign_step(&centroids, data);
        let repeated = assignments.last() == Some(&assign);
        assignments.push(assign.clone());
        if repeated {
            converged = true;
            break;
        }
        centroids = update_step(data, &assign, &centroids);
        objective_trace.push(objective(data, &centroids, &assign));
    }
    let assignment = assignments.last().expect("at least one iteration").clone();
    Ok(KmeansFit {
        centroids,
        assignment,
        trace: KmeansTrace {
            objective: objective_trace,
            iterations: assignments.len(),
            assignments,
            converged,
        },
    })
}

/// E step of a GMM constrained to spherical covariances `eps * I`:
/// responsibilities proportional to `pi_c * exp(-||x - mu_c||^2 / (2 eps))`,
/// normalized in log space.
pub fn spherical_responsibilities(
    centroids: &Centroids,
    data: &Dataset,
    eps: f64,
    weights: &[f64],
) -> Result<SoftAssignment> {
    if eps <= 0.0 {
        return Err(Error::invalid("eps must be positive"));
    }
    if weights.len() != centroids.k() {
        return Err(Error::LengthMismatch {
            expected: centroids.k(),
            got: weights.len(),
        });
    }
    let k = centroids.k();
    let log_w: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let mut resp = Vec::with_capacity(data.n() * k);
    let mut row = vec![0.0; k];
    for (i, x) in data.points().enumerate() {
        for c in 0..k {
            row[c] = log_w[c] - squared_distance(x, centroids.center(c)) / (2.0 * eps);
        }
        let row_max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !row_max.is_finite() {
            return Err(Error::DegenerateRow { point: i });
        }
        let mut sum = 0.0;
        for v in &mut row {
            *v = (*v - row_max).exp();
            sum += *v;
        }
        resp.extend(row.iter().map(|v| v / sum));
    }
    SoftAssignment::new(resp, k)
}
