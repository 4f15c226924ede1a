//! Shared iteration controls.

/// Iteration budget, convergence tolerance, and seed for iterative fits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Hard cap on outer iterations.
    pub max_iters: usize,
    /// Relative convergence tolerance on the monitored quantity.
    pub tol: f64,
    /// Seed for every random draw the fit makes.
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            max_iters: 300,
            tol: 1e-6,
            seed: 0,
        }
    }
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        RunConfig {
            seed,
            ..RunConfig::default()
        }
    }

    pub fn seeded(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }

    pub fn tolerance(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }
}
