//! The three subcommands. Every run is deterministic given the resolved
//! seed and the input files.

use std::collections::BTreeMap;
use std::env;
use std::time::Instant;

use serde::Serialize;
use unicluster_core::datagen::{preset_dataset, Preset};
use unicluster_core::density::{self, DbscanParams};
use unicluster_core::gmm::{self, InitStrategy};
use unicluster_core::kernels::{self, KernelSpec};
use unicluster_core::kmeans::{self, KmeansInit};
use unicluster_core::metrics;
use unicluster_core::rng::{derive_seed, rng_stream};
use unicluster_core::spectral;
use unicluster_core::{ClusteringReport, Dataset, HardAssignment, RunConfig};

use crate::io;
use crate::{Algo, CliError, FitArgs, GenerateArgs, KernelKind, ScoreArgs};

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

/// `--seed`, else `UNICLUSTER_SEED`, else 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env::var("UNICLUSTER_SEED") {
        Ok(text) => text
            .parse()
            .map_err(|_| usage(format!("UNICLUSTER_SEED must be an unsigned integer, got {text:?}"))),
        Err(_) => Ok(0),
    }
}

pub fn generate(args: &GenerateArgs) -> Result<(), CliError> {
    let preset = Preset::parse(&args.preset).map_err(|e| usage(e.to_string()))?;
    let n = args.n.unwrap_or_else(|| preset.default_n());
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let seed = resolve_seed(args.seed)?;
    let data = preset_dataset(preset, n, seed).map_err(|e| usage(e.to_string()))?;
    io::write_csv(&args.out, &data)
}

/// One fit report; field order is the documented schema.
#[derive(Serialize)]
struct FitOutput {
    algorithm: String,
    params: BTreeMap<String, f64>,
    seed: u64,
    labels: Vec<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    centers: Option<Vec<Vec<f64>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mixture: Option<MixtureOutput>,
    #[serde(skip_serializing_if = "Option::is_none")]
    loglik_trace: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    objective_trace: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eigenvalues: Option<Vec<f64>>,
    n_outliers: usize,
    iterations: usize,
    wall_time_ms: f64,
}

#[derive(Serialize)]
struct MixtureOutput {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    covariances: Vec<Vec<Vec<f64>>>,
}

impl FitOutput {
    fn new(algorithm: &str, seed: u64, labels: Vec<i64>) -> FitOutput {
        FitOutput {
            algorithm: algorithm.to_string(),
            params: BTreeMap::new(),
            seed,
            n_outliers: labels.iter().filter(|&&l| l < 0).count(),
            labels,
            centers: None,
            mixture: None,
            loglik_trace: None,
            objective_trace: None,
            eigenvalues: None,
            iterations: 0,
            wall_time_ms: 0.0,
        }
    }

    fn from_report(report: ClusteringReport, seed: u64) -> FitOutput {
        let mut out = FitOutput::new(&report.algorithm, seed, report.assignment.labels().to_vec());
        out.params = report.params.into_iter().collect();
        out.centers = report.centers;
        out.loglik_trace = report.loglik_trace;
        out.objective_trace = report.objective_trace;
        out.eigenvalues = report.eigenvalues;
        out.iterations = report.iterations;
        out
    }

    fn param(mut self, name: &str, value: f64) -> FitOutput {
        self.params.insert(name.to_string(), value);
        self
    }
}

struct FitPlan {
    seed: u64,
    restarts: u64,
    cfg: RunConfig,
}

fn require<T: Copy>(flag: Option<T>, name: &str, algo: &str) -> Result<T, CliError> {
    flag.ok_or_else(|| usage(format!("--{name} is required for --algo {algo}")))
}

fn require_positive(value: f64, name: &str) -> Result<f64, CliError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(usage(format!("--{name} must be positive, got {value}")))
    }
}

pub fn fit(args: &FitArgs) -> Result<(), CliError> {
    if args.restarts == 0 {
        return Err(usage("--restarts must be at least 1"));
    }
    if args.max_iters == 0 {
        return Err(usage("--max-iters must be at least 1"));
    }
    require_positive(args.tol, "tol")?;
    let seed = resolve_seed(args.seed)?;
    let plan = FitPlan {
        seed,
        restarts: args.restarts,
        cfg: RunConfig {
            seed,
            max_iters: args.max_iters,
            tol: args.tol,
        },
    };
    let data = io::read_csv(&args.input)?;

    let start = Instant::now();
    let mut output = match args.algo {
        Algo::Gmm => fit_gmm(args, &data, &plan)?,
        Algo::Kmeans => fit_kmeans(args, &data, &plan)?,
        Algo::Kkmeans => fit_kkmeans(args, &data, &plan)?,
        Algo::Sc => fit_sc(args, &data, &plan)?,
        Algo::Dbscan | Algo::DbscanSpectral | Algo::DbscanClimb => fit_dbscan(args, &data, &plan)?,
        Algo::Meanshift => {
            let eps = require_positive(require(args.eps, "eps", "meanshift")?, "eps")?;
            let report = density::mean_shift(&data, eps).map_err(CliError::Algorithm)?;
            FitOutput::from_report(report, plan.seed)
        }
    };
    output.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;

    if let Some(plot) = &args.emit_plot_data {
        io::write_plot_tsv(plot, &data, &output.labels)?;
    }
    io::write_json(args.out.as_deref(), &output)
}

fn fit_gmm(args: &FitArgs, data: &Dataset, plan: &FitPlan) -> Result<FitOutput, CliError> {
    let k = require(args.k, "k", "gmm")?;
    let mut best = None;
    for r in 0..plan.restarts {
        let cfg = RunConfig {
            seed: derive_seed(plan.seed, r),
            ..plan.cfg
        };
        let run = gmm::fit_em(data, k, &cfg, &InitStrategy::RandomPoints)
            .map_err(CliError::Algorithm)?;
        let loglik = *run.2.loglik.last().expect("at least one iteration");
        if best
            .as_ref()
            .is_none_or(|(b, _): &(f64, _)| loglik > *b)
        {
            best = Some((loglik, run));
        }
    }
    let (model, resp, trace) = best.expect("restarts >= 1").1;
    let mut out = FitOutput::new("gmm", plan.seed, resp.harden().labels().to_vec())
        .param("k", k as f64)
        .param("restarts", plan.restarts as f64);
    out.centers = Some(model.components.iter().map(|c| c.mean.clone()).collect());
    out.mixture = Some(MixtureOutput {
        weights: model.weights.clone(),
        means: model.components.iter().map(|c| c.mean.clone()).collect(),
        covariances: model.components.iter().map(|c| c.cov.to_rows()).collect(),
    });
    out.loglik_trace = Some(trace.loglik);
    out.iterations = trace.iterations;
    Ok(out)
}

fn fit_kmeans(args: &FitArgs, data: &Dataset, plan: &FitPlan) -> Result<FitOutput, CliError> {
    let k = require(args.k, "k", "kmeans")?;
    let mut best: Option<kmeans::KmeansFit> = None;
    for r in 0..plan.restarts {
        let cfg = RunConfig {
            seed: derive_seed(plan.seed, r),
            ..plan.cfg
        };
        let fit = kmeans::fit(data, k, &cfg, &KmeansInit::Forgy).map_err(CliError::Algorithm)?;
        if best
            .as_ref()
            .is_none_or(|b| fit.final_objective() < b.final_objective())
        {
            best = Some(fit);
        }
    }
    let fit = best.expect("restarts >= 1");
    let mut out = FitOutput::new("kmeans", plan.seed, fit.assignment.labels().to_vec())
        .param("k", k as f64)
        .param("restarts", plan.restarts as f64);
    out.centers = Some(fit.centroids.centers().to_vec());
    out.objective_trace = Some(fit.trace.objective);
    out.iterations = fit.trace.iterations;
    Ok(out)
}

fn kernel_spec(args: &FitArgs) -> Result<KernelSpec, CliError> {
    match args.kernel {
        KernelKind::Linear => Ok(KernelSpec::Linear),
        KernelKind::Gaussian => {
            let sigma = require(args.sigma, "sigma", "kkmeans with --kernel gaussian")?;
            Ok(KernelSpec::Gaussian {
                sigma: require_positive(sigma, "sigma")?,
            })
        }
        KernelKind::Polynomial => {
            if args.poly_b < 1.0 || !args.poly_b.is_finite() {
                return Err(usage(format!(
                    "--poly-b must be at least 1, got {}",
                    args.poly_b
                )));
            }
            if !args.poly_c.is_finite() {
                return Err(usage("--poly-c must be finite"));
            }
            Ok(KernelSpec::Polynomial {
                c: args.poly_c,
                b: args.poly_b,
            })
        }
    }
}

fn fit_kkmeans(args: &FitArgs, data: &Dataset, plan: &FitPlan) -> Result<FitOutput, CliError> {
    let k = require(args.k, "k", "kkmeans")?;
    let spec = kernel_spec(args)?;
    // Checked here because the balanced init is built before wkk_fit runs
    // its own validation; reported as the same library error.
    if k == 0 || data.n() < k {
        return Err(CliError::Algorithm(unicluster_core::Error::InvalidParam(
            format!("need 1 <= k <= n, got k = {k} with n = {}", data.n()),
        )));
    }
    let matrix = kernels::kernel_matrix(spec, data).map_err(CliError::Algorithm)?;
    let weights = vec![1.0; data.n()];
    let mut best: Option<kernels::WkkFit> = None;
    for r in 0..plan.restarts {
        let mut rng = rng_stream(derive_seed(plan.seed, r));
        let init = kernels::balanced_random_assignment(data.n(), k, &mut rng);
        let fit =
            kernels::wkk_fit(&matrix, &weights, k, &plan.cfg, &init).map_err(CliError::Algorithm)?;
        let objective = *fit.objective.last().expect("at least one iteration");
        if best
            .as_ref()
            .is_none_or(|b| objective < *b.objective.last().expect("at least one iteration"))
        {
            best = Some(fit);
        }
    }
    let fit = best.expect("restarts >= 1");
    let mut out = FitOutput::new("kkmeans", plan.seed, fit.assignment.labels().to_vec())
        .param("k", k as f64)
        .param("restarts", plan.restarts as f64);
    match spec {
        KernelSpec::Linear => {}
        KernelSpec::Gaussian { sigma } => out = out.param("sigma", sigma),
        KernelSpec::Polynomial { c, b } => out = out.param("poly_c", c).param("poly_b", b),
        KernelSpec::Heaviside { eps } => out = out.param("eps", eps),
    }
    out.objective_trace = Some(fit.objective);
    out.iterations = fit.iterations;
    Ok(out)
}

fn fit_sc(args: &FitArgs, data: &Dataset, plan: &FitPlan) -> Result<FitOutput, CliError> {
    let k = require(args.k, "k", "sc")?;
    let sigma = require_positive(require(args.sigma, "sigma", "sc")?, "sigma")?;
    let report = spectral::njw_fit(data, k, sigma, &plan.cfg, plan.restarts as usize)
        .map_err(CliError::Algorithm)?;
    Ok(FitOutput::from_report(report, plan.seed))
}

fn fit_dbscan(args: &FitArgs, data: &Dataset, plan: &FitPlan) -> Result<FitOutput, CliError> {
    let algo = match args.algo {
        Algo::Dbscan => "dbscan",
        Algo::DbscanSpectral => "dbscan-spectral",
        _ => "dbscan-climb",
    };
    let eps = require_positive(require(args.eps, "eps", algo)?, "eps")?;
    let min_pts = require(args.min_pts, "min-pts", algo)?;
    if min_pts == 0 {
        return Err(usage("--min-pts must be at least 1"));
    }
    let params = DbscanParams::new(eps, min_pts).map_err(CliError::Algorithm)?;
    let report = match args.algo {
        Algo::Dbscan => density::dbscan_graph(data, params),
        Algo::DbscanSpectral => density::dbscan_spectral(data, params),
        _ => density::dbscan_climb(data, params),
    }
    .map_err(CliError::Algorithm)?;
    Ok(FitOutput::from_report(report, plan.seed))
}

/// Round to six decimal places, normalizing negative zero.
fn round6(v: f64) -> f64 {
    let r = (v * 1e6).round() / 1e6;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Serialize)]
struct ScoreOutput {
    ami: f64,
    ari: f64,
}

pub fn score(args: &ScoreArgs) -> Result<(), CliError> {
    let pred = io::read_labels(&args.pred)?;
    let truth = io::read_labels(&args.truth)?;
    if pred.len() != truth.len() {
        return Err(usage(format!(
            "label lengths differ: {} predicted vs {} reference",
            pred.len(),
            truth.len()
        )));
    }
    let pred = HardAssignment::new(pred).map_err(|e| usage(e.to_string()))?;
    let truth = HardAssignment::new(truth).map_err(|e| usage(e.to_string()))?;
    let output = ScoreOutput {
        ami: round6(metrics::ami(&pred, &truth).map_err(|e| usage(e.to_string()))?),
        ari: round6(metrics::ari(&pred, &truth).map_err(|e| usage(e.to_string()))?),
    };
    io::write_json(None, &output)
}
