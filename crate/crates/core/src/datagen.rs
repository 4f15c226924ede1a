//! Seeded synthetic datasets: Gaussian blobs and concentric circles,
//! plus named presets that pin the parameters used by the acceptance
//! tests. Every generator is a pure function of its parameters and the
//! seed.

use std::f64::consts::TAU;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gaussian::GaussianParams;
use crate::gmm::{sample_mixture, MixtureModel};
use crate::linalg::SymMatrix;
use crate::rng::RngStream;

/// Mixture-of-Gaussians sample with the component index kept as label.
pub fn blobs(
    n: usize,
    means: &[Vec<f64>],
    covariances: &[SymMatrix],
    weights: &[f64],
    rng: &mut RngStream,
) -> Result<Dataset> {
    if means.len() != covariances.len() {
        return Err(Error::LengthMismatch {
            expected: means.len(),
            got: covariances.len(),
        });
    }
    let components: Vec<GaussianParams> = means
        .iter()
        .zip(covariances)
        .map(|(m, c)| GaussianParams::new(m.clone(), c.clone()))
        .collect::<Result<_>>()?;
    let model = MixtureModel::new(weights.to_vec(), components)?;
    sample_mixture(&model, n, rng)
}

/// Two concentric rings: half the points per ring, uniform angle,
/// Gaussian radial noise. Labels are 0 (inner) and 1 (outer); an odd
/// point goes to the outer ring.
pub fn circles(
    n: usize,
    r_inner: f64,
    r_outer: f64,
    noise: f64,
    rng: &mut RngStream,
) -> Result<Dataset> {
    if !(0.0 < r_inner && r_inner < r_outer) {
        return Err(Error::invalid(format!(
            "need 0 < r_inner < r_outer, got {r_inner} and {r_outer}"
        )));
    }
    if n == 0 {
        return Err(Error::invalid("sample count must be at least 1"));
    }
    if noise < 0.0 {
        return Err(Error::invalid("radial noise must be nonnegative"));
    }
    let inner = n / 2;
    let mut values = Vec::with_capacity(n * 2);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let base = if i < inner { r_inner } else { r_outer };
        let angle = rng.uniform_in(0.0, TAU);
        let radius = base + noise * rng.normal();
        values.push(radius * angle.cos());
        values.push(radius * angle.sin());
        labels.push(i64::from(i >= inner));
    }
    Dataset::new(values, 2)?.with_labels(labels)
}

/// Named parameter sets for the bundled figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Two long horizontal Gaussians stacked vertically: a mixture fit
    /// separates them, a squared-distance split does not.
    Fig3,
    /// Three well-separated anisotropic Gaussians.
    Fig5,
    /// Concentric rings, radii 1 and 3.
    Circles,
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Fig3 => "fig3",
            Preset::Fig5 => "fig5",
            Preset::Circles => "circles",
        }
    }

    pub fn parse(name: &str) -> Result<Preset> {
        match name {
            "fig3" => Ok(Preset::Fig3),
            "fig5" => Ok(Preset::Fig5),
            "circles" => Ok(Preset::Circles),
            other => Err(Error::invalid(format!("unknown preset {other:?}"))),
        }
    }

    pub fn default_n(&self) -> usize {
        match self {
            Preset::Fig3 => 600,
            Preset::Fig5 => 1500,
            Preset::Circles => 300,
        }
    }
}

fn cov2(a: f64, b: f64, c: f64) -> SymMatrix {
    SymMatrix::from_rows(&[vec![a, b], vec![b, c]]).expect("literal covariance")
}

/// Generate a preset dataset (labels included) with `n` points.
pub fn preset_dataset(preset: Preset, n: usize, seed: u64) -> Result<Dataset> {
    let mut rng = RngStream::new(seed);
    match preset {
        Preset::Fig3 => {
            let means = vec![vec![0.0, 0.0], vec![0.0, 2.5]];
            let covs = vec![cov2(16.0, 0.0, 0.35), cov2(16.0, 0.0, 0.35)];
            blobs(n, &means, &covs, &[0.5, 0.5], &mut rng)
        }
        Preset::Fig5 => {
            let means = vec![vec![0.0, 0.0], vec![8.0, 8.0], vec![-7.0, 6.0]];
            let covs = vec![
                cov2(2.0, 0.9, 0.5),
                cov2(1.2, -0.8, 1.5),
                cov2(0.8, 0.2, 2.2),
            ];
            let third = 1.0 / 3.0;
            blobs(n, &means, &covs, &[third, third, third], &mut rng)
        }
        Preset::Circles => circles(n, 1.0, 3.0, 0.05, &mut rng),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_stream;

    #[test]
    fn blobs_single_component_matches_gaussian_sample() {
        let mean = vec![1.0, -2.0];
        let cov = cov2(1.0, 0.3, 0.5);
        let mut rng_a = rng_stream(100);
        let got = blobs(50, &[mean.clone()], &[cov.clone()], &[1.0], &mut rng_a).unwrap();
        assert_eq!(got.n(), 50);
        assert!(got.labels().unwrap().iter().all(|&l| l == 0));
        // Replay: one component-choice uniform per point, then the
        // Gaussian draw; with k=1 the points must coincide exactly.
        let params = GaussianParams::new(mean, cov).unwrap();
        let mut rng_b = rng_stream(100);
        for i in 0..50 {
            rng_b.uniform();
            let direct = params.sample(1, &mut rng_b).unwrap();
            assert_eq!(got.point(i), direct.point(0), "point {i}");
        }
    }

    #[test]
    fn blobs_degenerate_weight_pins_labels() {
        let means = vec![vec![0.0], vec![100.0]];
        let covs = vec![
            SymMatrix::from_rows(&[vec![1.0]]).unwrap(),
            SymMatrix::from_rows(&[vec![1.0]]).unwrap(),
        ];
        let mut rng = rng_stream(101);
        let data = blobs(200, &means, &covs, &[1.0, 0.0], &mut rng).unwrap();
        assert!(data.labels().unwrap().iter().all(|&l| l == 0));
        assert!(data.points().all(|p| p[0].abs() < 10.0));
    }

    #[test]
    fn fig5_label_frequencies_track_weights() {
        let data = preset_dataset(Preset::Fig5, 1500, 102).unwrap();
        assert_eq!(data.n(), 1500);
        assert_eq!(data.d(), 2);
        let labels = data.labels().unwrap();
        for c in 0..3 {
            let freq = labels.iter().filter(|&&l| l == c).count() as f64 / 1500.0;
            assert!((freq - 1.0 / 3.0).abs() <= 0.03, "component {c}: {freq}");
        }
    }

    #[test]
    fn circles_without_noise_sit_on_exact_radii() {
        let mut rng = rng_stream(103);
        let data = circles(40, 1.0, 3.0, 0.0, &mut rng).unwrap();
        let labels = data.labels().unwrap();
        for i in 0..40 {
            let r = data.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
            let expected = if labels[i] == 0 { 1.0 } else { 3.0 };
            assert!((r - expected).abs() <= 1e-12, "point {i}: {r}");
        }
    }

    #[test]
    fn circles_rings_are_radially_separable() {
        for seed in 104u64..114 {
            let mut rng = rng_stream(seed);
            let data = circles(300, 1.0, 3.0, 0.05, &mut rng).unwrap();
            let labels = data.labels().unwrap();
            let mut max_inner = f64::NEG_INFINITY;
            let mut min_outer = f64::INFINITY;
            for i in 0..300 {
                let r = data.point(i).iter().map(|v| v * v).sum::<f64>().sqrt();
                if labels[i] == 0 {
                    max_inner = max_inner.max(r);
                } else {
                    min_outer = min_outer.min(r);
                }
            }
            // The radial coordinate is a linear feature after the norm
            // lift, so this gap is exactly linear separability.
            assert!(min_outer > max_inner, "seed {seed}");
        }
    }

    #[test]
    fn circles_split_point_counts() {
        let mut rng = rng_stream(115);
        let data = circles(7, 1.0, 2.0, 0.0, &mut rng).unwrap();
        let labels = data.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 0).count(), 3);
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 4);
    }

    #[test]
    fn circles_rejects_bad_radii() {
        let mut rng = rng_stream(116);
        assert!(circles(10, 3.0, 1.0, 0.0, &mut rng).is_err());
        assert!(circles(10, 0.0, 1.0, 0.0, &mut rng).is_err());
    }

    #[test]
    fn generators_are_reproducible() {
        let a = preset_dataset(Preset::Circles, 300, 117).unwrap();
        let b = preset_dataset(Preset::Circles, 300, 117).unwrap();
        assert_eq!(
            a.points().collect::<Vec<_>>(),
            b.points().collect::<Vec<_>>()
        );
        assert_eq!(a.labels(), b.labels());
        let c = preset_dataset(Preset::Circles, 300, 118).unwrap();
        assert_ne!(
            a.points().collect::<Vec<_>>(),
            c.points().collect::<Vec<_>>()
        );
    }

    #[test]
    fn preset_parsing_round_trips() {
        for p in [Preset::Fig3, Preset::Fig5, Preset::Circles] {
            assert_eq!(Preset::parse(p.name()).unwrap(), p);
        }
        assert!(Preset::parse("fig9").is_err());
    }
}
