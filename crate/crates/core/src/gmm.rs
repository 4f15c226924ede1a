//! Gaussian mixtures fit by expectation-maximization.
//!
//! The E step computes responsibilities
//!
//! ```text
//! lambda[i][c] = pi[c] N(x_i | mu_c, Sigma_c) / sum_j pi[j] N(x_i | mu_j, Sigma_j)
//! ```
//!
//! entirely in log space (per-row max subtraction), because the literal
//! quotient underflows in double precision for points far from every
//! component. The M step re-estimates each component from its
//! responsibility-weighted points, with the covariance taken around the
//! updated mean. Each full iteration cannot decrease the data
//! log-likelihood; that monotonicity is the main correctness check on the
//! whole module and is asserted by tests over many seeds.

use crate::assign::SoftAssignment;
use crate::config::RunConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gaussian::{self, GaussianParams, Prepared};
use crate::linalg::SymMatrix;
use crate::rng::RngStream;

/// A component is starved when its responsibility mass falls below this
/// fraction of n.
pub const STARVED_FRACTION: f64 = 1e-8;

/// Weights and component parameters of a Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureModel {
    pub weights: Vec<f64>,
    pub components: Vec<GaussianParams>,
}

impl MixtureModel {
    pub fn new(weights: Vec<f64>, components: Vec<GaussianParams>) -> Result<Self> {
        if weights.len() != components.len() || components.is_empty() {
            return Err(Error::LengthMismatch {
                expected: components.len().max(1),
                got: weights.len(),
            });
        }
        let sum: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(0.0..=1.0 + 1e-9).contains(w)) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "mixing weights must lie in [0, 1] and sum to 1, got sum {sum}"
            )));
        }
        let d = components[0].d();
        if components.iter().any(|c| c.d() != d) {
            return Err(Error::invalid("components must share one dimension"));
        }
        Ok(MixtureModel {
            weights,
            components,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn d(&self) -> usize {
        self.components[0].d()
    }

    fn prepare(&self) -> Result<Vec<Prepared>> {
        self.components.iter().map(|c| c.prepare()).collect()
    }
}

/// Log-likelihood trace of an EM run.
#[derive(Debug, Clone, PartialEq)]
pub struct EmTrace {
    /// Log-likelihood after each M step.
    pub loglik: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// How `fit_em` chooses its starting model.
#[derive(Debug, Clone)]
pub enum InitStrategy {
    /// k distinct data points as means, the global covariance for every
    /// component, uniform weights. Seeded from the run config.
    RandomPoints,
    /// Start from a caller-supplied model.
    Explicit(MixtureModel),
}

/// Responsibilities of every component for every point.
pub fn e_step(model: &MixtureModel, data: &Dataset) -> Result<SoftAssignment> {
    if model.d() != data.d() {
        return Err(Error::LengthMismatch {
            expected: data.d(),
            got: model.d(),
        });
    }
    let prepared = model.prepare()?;
    let k = model.k();
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let mut resp = Vec::with_capacity(data.n() * k);
    let mut row = vec![0.0; k];
    for (i, x) in data.points().enumerate() {
        for c in 0..k {
            row[c] = log_w[c] + prepared[c].log_pdf(x);
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

/// Weighted re-estimation of every component from `resp`.
///
/// A starved component (mass below [`STARVED_FRACTION`] of n) is restarted
/// at the point the current model explains worst: its mean moves to the
/// point with the lowest max-responsibility, its covariance resets to the
/// global covariance, and the weight vector is renormalized.
pub fn m_step(data: &Dataset, resp: &SoftAssignment) -> Result<MixtureModel> {
    if resp.n() != data.n() {
        return Err(Error::LengthMismatch {
            expected: data.n(),
            got: resp.n(),
        });
    }
    let (n, d, k) = (data.n(), data.d(), resp.k());
    let mass: Vec<f64> = (0..k)
        .map(|c| (0..n).map(|i| resp.get(i, c)).sum())
        .collect();

    let mut weights_raw = vec![0.0; k];
    let mut components = Vec::with_capacity(k);
    let mut global_cov: Option<SymMatrix> = None;
    let mut worst_point: Option<usize> = None;
    for c in 0..k {
        if mass[c] < STARVED_FRACTION * n as f64 {
            let cov = global_cov
                .get_or_insert_with(|| gaussian::fit_mle(data).cov.clone())
                .clone();
            let anchor = *worst_point.get_or_insert_with(|| {
                let mut best = 0;
                let mut best_val = f64::INFINITY;
                for i in 0..n {
                    let row_max = resp.row(i).iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    if row_max < best_val {
                        best_val = row_max;
                        best = i;
                    }
                }
                best
            });
            components.push(GaussianParams::new(data.point(anchor).to_vec(), cov)?);
            weights_raw[c] = 1.0 / n as f64;
            continue;
        }
        let mut mean = vec![0.0; d];
        for (i, x) in data.points().enumerate() {
            let w = resp.get(i, c);
            for (m, v) in mean.iter_mut().zip(x) {
                *m += w * v;
            }
        }
        for m in &mut mean {
            *m /= mass[c];
        }
        let mut scatter = vec![0.0; d * d];
        let mut dev = vec![0.0; d];
        for (i, x) in data.points().enumerate() {
            let w = resp.get(i, c);
            for (dv, (v, m)) in dev.iter_mut().zip(x.iter().zip(&mean)) {
                *dv = v - m;
            }
            for a in 0..d {
                for b in a..d {
                    scatter[a * d + b] += w * dev[a] * dev[b];
                }
            }
        }
        let mut cov = SymMatrix::from_fn(d, |i, j| scatter[i * d + j] / mass[c]);
        cov.add_diagonal(gaussian::regularizer(&cov));
        components.push(GaussianParams::new(mean, cov)?);
        weights_raw[c] = mass[c] / n as f64;
    }
    let total: f64 = weights_raw.iter().sum();
    let weights = weights_raw.into_iter().map(|w| w / total).collect();
    MixtureModel::new(weights, components)
}

/// Mixture log-likelihood of the data under the model, via log-sum-exp.
pub fn log_likelihood(model: &MixtureModel, data: &Dataset) -> Result<f64> {
    if model.d() != data.d() {
        return Err(Error::LengthMismatch {
            expected: data.d(),
            got: model.d(),
        });
    }
    let prepared = model.prepare()?;
    let log_w: Vec<f64> = model.weights.iter().map(|w| w.ln()).collect();
    let mut total = 0.0;
    for x in data.points() {
        let terms: Vec<f64> = prepared
            .iter()
            .zip(&log_w)
            .map(|(p, lw)| lw + p.log_pdf(x))
            .collect();
        let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if m == f64::NEG_INFINITY {
            total = f64::NEG_INFINITY;
            continue;
        }
        total += m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln();
    }
    Ok(total)
}

/// Alternate E and M steps until the log-likelihood stabilizes.
///
/// Convergence: relative change below `cfg.tol`, measured against
/// `max(1, |previous|)`. Returns the final model, the responsibilities
/// under that model, and the per-iteration log-likelihood trace.
pub fn fit_em(
    data: &Dataset,
    k: usize,
    cfg: &RunConfig,
    init: &InitStrategy,
) -> Result<(MixtureModel, SoftAssignment, EmTrace)> {
    if k == 0 || data.n() < k {
        return Err(Error::invalid(format!(
            "need 1 <= k <= n, got k = {k} with n = {}",
            data.n()
        )));
    }
    if cfg.max_iters == 0 {
        return Err(Error::invalid("max_iters must be at least 1"));
    }
    let mut model = match init {
        InitStrategy::RandomPoints => random_points_init(data, k, cfg.seed)?,
        InitStrategy::Explicit(m) => {
            if m.k() != k || m.d() != data.d() {
                return Err(Error::invalid(
                    "explicit initial model must match k and data dimension",
                ));
            }
            m.clone()
        }
    };
    let mut loglik = Vec::new();
    let mut converged = false;
    for _ in 0..cfg.max_iters {
        let resp = e_step(&model, data)?;
        model = m_step(data, &resp)?;
        let ll = log_likelihood(&model, data)?;
        let done = loglik
            .last()
            .is_some_and(|prev: &f64| (ll - prev).abs() <= cfg.tol * prev.abs().max(1.0));
        loglik.push(ll);
        if done {
            converged = true;
            break;
        }
    }
    let resp = e_step(&model, data)?;
    let trace = EmTrace {
        iterations: loglik.len(),
        loglik,
        converged,
    };
    Ok((model, resp, trace))
}

fn random_points_init(data: &Dataset, k: usize, seed: u64) -> Result<MixtureModel> {
    let mut rng = RngStream::new(seed);
    let picks = rng.distinct_indices(k, data.n());
    let cov = gaussian::fit_mle(data).cov;
    let components = picks
        .into_iter()
        .map(|i| GaussianParams::new(data.point(i).to_vec(), cov.clone()))
        .collect::<Result<Vec<_>>>()?;
    MixtureModel::new(vec![1.0 / k as f64; k], components)
}

/// Draw `count` points, labeling each with its source component.
pub fn sample_mixture(
    model: &MixtureModel,
    count: usize,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if count == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    let d = model.d();
    let mut chols = Vec::with_capacity(model.k());
    for c in &model.components {
        chols.push(crate::linalg::cholesky(&c.cov)?);
    }
    let mut values = Vec::with_capacity(count * d);
    let mut labels = Vec::with_capacity(count);
    for _ in 0..count {
        let u = rng.uniform();
        let mut cum = 0.0;
        let mut comp = model.k() - 1;
        for (c, w) in model.weights.iter().enumerate() {
            cum += w;
            if u < cum {
                comp = c;
                break;
            }
        }
        let z: Vec<f64> = (0..d).map(|_| rng.normal()).collect();
        let offset = chols[comp].transform(&z);
        values.extend(
            model.components[comp]
                .mean
                .iter()
                .zip(offset)
                .map(|(m, o)| m + o),
        );
        labels.push(comp as i64);
    }
    Dataset::new(values, d)?.with_labels(labels)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    fn simple_model(k: usize) -> MixtureModel {
        let comps: Vec<GaussianParams> = (0..k)
            .map(|c| {
                GaussianParams::new(vec![3.0 * c as f64, 0.0], SymMatrix::identity(2)).unwrap()
            })
            .collect();
        MixtureModel::new(vec![1.0 / k as f64; k], comps).unwrap()
    }

    fn random_dataset(n: usize, d: usize, seed: u64) -> Dataset {
        let mut rng = rng_stream(seed);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.uniform_in(-3.0, 3.0)).collect())
            .collect();
        Dataset::from_rows(&rows).unwrap()
    }

    #[test]
    fn e_step_single_component_is_all_ones() {
        let model = simple_model(1);
        let data = random_dataset(10, 2, 1);
        let resp = e_step(&model, &data).unwrap();
        for i in 0..10 {
            assert_eq!(resp.get(i, 0), 1.0);
        }
    }

    #[test]
    fn e_step_identical_components_split_evenly() {
        let g = GaussianParams::new(vec![1.0, 1.0], SymMatrix::identity(2)).unwrap();
        let model = MixtureModel::new(vec![0.5, 0.5], vec![g.clone(), g]).unwrap();
        let data = random_dataset(8, 2, 2);
        let resp = e_step(&model, &data).unwrap();
        for i in 0..8 {
            assert!((resp.get(i, 0) - 0.5).abs() < 1e-12);
            assert!((resp.get(i, 1) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn e_step_matches_naive_bayes_quotient() {
        let mut rng = rng_stream(3);
        let comps: Vec<GaussianParams> = (0..3)
            .map(|_| {
                let mean = vec![rng.uniform_in(-2.0, 2.0), rng.uniform_in(-2.0, 2.0)];
                let a = rng.uniform_in(0.5, 2.0);
                let b = rng.uniform_in(0.5, 2.0);
                let c = rng.uniform_in(-0.3, 0.3);
                GaussianParams::new(
                    mean,
                    SymMatrix::from_rows(&[vec![a, c], vec![c, b]]).unwrap(),
                )
                .unwrap()
            })
            .collect();
        let model = MixtureModel::new(vec![0.2, 0.5, 0.3], comps).unwrap();
        let data = random_dataset(20, 2, 4);
        let resp = e_step(&model, &data).unwrap();
        for (i, x) in data.points().enumerate() {
            let dens: Vec<f64> = model
                .components
                .iter()
                .zip(&model.weights)
                .map(|(g, w)| w * g.log_pdf(x).unwrap().exp())
                .collect();
            let total: f64 = dens.iter().sum();
            for c in 0..3 {
                assert!((resp.get(i, c) - dens[c] / total).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn e_step_rows_sum_to_one_and_masses_sum_to_n() {
        let model = simple_model(3);
        let data = random_dataset(40, 2, 5);
        let resp = e_step(&model, &data).unwrap();
        let mass: f64 = (0..40).map(|i| resp.row(i).iter().sum::<f64>()).sum();
        assert!((mass - 40.0).abs() < 1e-9);
    }

    #[test]
    fn m_step_with_all_mass_on_one_component_reduces_to_mle() {
        let data = random_dataset(12, 2, 6);
        let mut resp = Vec::new();
        for _ in 0..12 {
            resp.extend([1.0, 0.0]);
        }
        let model = m_step(&data, &SoftAssignment::new(resp, 2).unwrap()).unwrap();
        let mle = gaussian::fit_mle(&data);
        for (a, b) in model.components[0].mean.iter().zip(&mle.mean) {
            assert!((a - b).abs() < 1e-12);
        }
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (model.components[0].cov.get(i, j) - mle.cov.get(i, j)).abs() < 1e-12
                );
            }
        }
        // The starved component restarts at the worst-explained point
        // (all points tie at max-responsibility 1, so the lowest index).
        assert_eq!(model.components[1].mean, data.point(0).to_vec());
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(model.components[1].cov.get(i, j), mle.cov.get(i, j));
            }
        }
        assert!((model.weights.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn m_step_uniform_resp_pulls_means_to_global_mean() {
        let data = random_dataset(15, 2, 7);
        let resp: Vec<f64> = vec![1.0 / 3.0; 15 * 3];
        let model = m_step(&data, &SoftAssignment::new(resp, 3).unwrap()).unwrap();
        let global = data.mean();
        for c in 0..3 {
            for (a, b) in model.components[c].mean.iter().zip(&global) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn m_step_matches_direct_weighted_arithmetic() {
        let data = random_dataset(10, 2, 8);
        let mut rng = rng_stream(9);
        let mut resp = Vec::new();
        for _ in 0..10 {
            let a = rng.uniform_in(0.05, 0.95);
            resp.extend([a, 1.0 - a]);
        }
        let soft = SoftAssignment::new(resp.clone(), 2).unwrap();
        let model = m_step(&data, &soft).unwrap();
        for c in 0..2 {
            let mass: f64 = (0..10).map(|i| resp[i * 2 + c]).sum();
            let mut mean = [0.0; 2];
            for (i, x) in data.points().enumerate() {
                mean[0] += resp[i * 2 + c] * x[0];
                mean[1] += resp[i * 2 + c] * x[1];
            }
            mean[0] /= mass;
            mean[1] /= mass;
            assert!((model.components[c].mean[0] - mean[0]).abs() < 1e-12);
            assert!((model.components[c].mean[1] - mean[1]).abs() < 1e-12);
            let mut scatter = [0.0; 4];
            for (i, x) in data.points().enumerate() {
                let dv = [x[0] - mean[0], x[1] - mean[1]];
                for a in 0..2 {
                    for b in 0..2 {
                        scatter[a * 2 + b] += resp[i * 2 + c] * dv[a] * dv[b];
                    }
                }
            }
            for a in 0..2 {
                for b in 0..2 {
                    let mut want = scatter[a * 2 + b] / mass;
                    if a == b {
                        let raw =
                            SymMatrix::from_fn(2, |i, j| scatter[i * 2 + j] / mass);
                        want += gaussian::regularizer(&raw);
                    }
                    assert!((model.components[c].cov.get(a, b) - want).abs() < 1e-12);
                }
            }
            assert!((model.weights[c] - mass / 10.0).abs() < 1e-12);
        }
    }

    #[test]
    fn log_likelihood_single_component_is_sum_of_log_pdf() {
        let model = simple_model(1);
        let data = random_dataset(9, 2, 10);
        let want: f64 = data
            .points()
            .map(|x| model.components[0].log_pdf(x).unwrap())
            .sum();
        let got = log_likelihood(&model, &data).unwrap();
        assert!((got - want).abs() < 1e-10);
    }

    #[test]
    fn log_likelihood_doubles_on_duplicated_data() {
        let model = simple_model(2);
        let data = random_dataset(7, 2, 11);
        let mut doubled: Vec<Vec<f64>> = data.points().map(|p| p.to_vec()).collect();
        doubled.extend(data.points().map(|p| p.to_vec()));
        let twice = Dataset::from_rows(&doubled).unwrap();
        let single = log_likelihood(&model, &data).unwrap();
        let both = log_likelihood(&model, &twice).unwrap();
        assert!((both - 2.0 * single).abs() < 1e-9);
    }

    #[test]
    fn log_likelihood_matches_naive_summation() {
        let model = simple_model(3);
        let data = random_dataset(25, 2, 12);
        let naive: f64 = data
            .points()
            .map(|x| {
                model
                    .components
                    .iter()
                    .zip(&model.weights)
                    .map(|(g, w)| w * g.log_pdf(x).unwrap().exp())
                    .sum::<f64>()
                    .ln()
            })
            .sum();
        let got = log_likelihood(&model, &data).unwrap();
        assert!((got - naive).abs() < 1e-9);
    }

    #[test]
    fn fit_em_k1_reproduces_single_gaussian_mle() {
        let data = random_dataset(30, 2, 13);
        let cfg = RunConfig::default();
        let (model, resp, trace) =
            fit_em(&data, 1, &cfg, &InitStrategy::RandomPoints).unwrap();
        let mle = gaussian::fit_mle(&data);
        for (a, b) in model.components[0].mean.iter().zip(&mle.mean) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(trace.converged);
        assert!(trace.iterations <= 2);
        assert_eq!(resp.get(0, 0), 1.0);
    }

    #[test]
    fn fit_em_trace_is_monotone() {
        for seed in [21, 22, 23, 24] {
            let truth = simple_model(3);
            let data = sample_mixture(&truth, 150, &mut rng_stream(seed)).unwrap();
            let cfg = RunConfig::with_seed(seed);
            let (_, _, trace) =
                fit_em(&data, 3, &cfg, &InitStrategy::RandomPoints).unwrap();
            for w in trace.loglik.windows(2) {
                assert!(
                    w[1] >= w[0] - 1e-8 * w[0].abs(),
                    "seed {seed}: {} -> {}",
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn fit_em_recovers_separated_components() {
        let comps = vec![
            GaussianParams::new(vec![0.0, 0.0], SymMatrix::identity(2)).unwrap(),
            GaussianParams::new(vec![12.0, 0.0], SymMatrix::identity(2)).unwrap(),
            GaussianParams::new(vec![0.0, 12.0], SymMatrix::identity(2)).unwrap(),
        ];
        let truth = MixtureModel::new(vec![1.0 / 3.0; 3], comps).unwrap();
        let data = sample_mixture(&truth, 300, &mut rng_stream(31)).unwrap();
        let labels = data.labels().unwrap().to_vec();
        let cfg = RunConfig::with_seed(31);
        let (_, resp, _) = fit_em(&data, 3, &cfg, &InitStrategy::RandomPoints).unwrap();
        let pred = resp.harden();
        let truth_assign = crate::assign::HardAssignment::new(labels).unwrap();
        let ari = crate::metrics::ari(&truth_assign, &pred).unwrap();
        assert!(ari >= 0.95, "ari {ari}");
    }

    #[test]
    fn sample_mixture_degenerate_weights_label_zero() {
        let model = MixtureModel::new(
            vec![1.0, 0.0],
            vec![
                GaussianParams::new(vec![0.0], SymMatrix::identity(1)).unwrap(),
                GaussianParams::new(vec![9.0], SymMatrix::identity(1)).unwrap(),
            ],
        )
        .unwrap();
        let ds = sample_mixture(&model, 40, &mut rng_stream(14)).unwrap();
        assert!(ds.labels().unwrap().iter().all(|&l| l == 0));
    }

    #[test]
    fn sample_mixture_is_reproducible() {
        let model = simple_model(2);
        let a = sample_mixture(&model, 25, &mut rng_stream(15)).unwrap();
        let b = sample_mixture(&model, 25, &mut rng_stream(15)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_mixture_frequencies_follow_weights() {
        let model = MixtureModel::new(
            vec![0.6, 0.1, 0.3],
            simple_model(3).components,
        )
        .unwrap();
        let ds = sample_mixture(&model, 100_000, &mut rng_stream(16)).unwrap();
        let labels = ds.labels().unwrap();
        for (c, want) in model.weights.iter().enumerate() {
            let freq =
                labels.iter().filter(|&&l| l == c as i64).count() as f64 / 1e5;
            assert!((freq - want).abs() < 0.01, "component {c}: {freq}");
        }
    }

    #[test]
    fn degenerate_row_is_reported() {
        // Zero-variance components astronomically far from the probe point
        // drive every log density to -inf.
        let tiny = SymMatrix::from_diag(&[1e-300]);
        let model = MixtureModel::new(
            vec![1.0],
            vec![GaussianParams::new(vec![0.0], tiny).unwrap()],
        )
        .unwrap();
        let data = Dataset::from_rows(&[vec![1e200]]).unwrap();
        match e_step(&model, &data) {
            Err(Error::DegenerateRow { point }) => assert_eq!(point, 0),
            other => panic!("expected DegenerateRow, got {other:?}"),
        }
    }
}
