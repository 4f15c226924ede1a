//! A unified clustering library.
//!
//! Five families of clustering algorithms share one set of data structures
//! and one deterministic RNG: single-Gaussian maximum likelihood, Gaussian
//! mixtures fit by EM, k-means (plain, weighted, and kernelized), spectral
//! clustering on normalized graph cuts, and density methods (DBSCAN in three
//! equivalent formulations plus mean shift).
//!
//! The families are connected: k-means is the small-variance limit of EM on
//! a spherical mixture, weighted kernel k-means maximizes the same trace
//! objective as the normalized-cut relaxation solved by spectral clustering,
//! and DBSCAN's region-growing step is a connected-components problem that
//! can be read off the eigenvalue-1 eigenspace of a neighborhood graph or
//! reproduced by mode seeking. Those bridges are not just documentation:
//! each one is checked by tests that run both routes and compare results.

pub mod assign;
pub mod config;
pub mod data;
pub mod datagen;
pub mod density;
pub mod error;
pub mod gaussian;
pub mod gmm;
pub mod graph;
pub mod kernels;
pub mod kmeans;
pub mod linalg;
pub mod metrics;
pub mod report;
pub mod rng;
pub mod spectral;

pub use assign::{HardAssignment, SoftAssignment, OUTLIER};
pub use config::RunConfig;
pub use data::Dataset;
pub use error::{Error, Result};
pub use report::ClusteringReport;
pub use rng::{rng_stream, RngStream};
