//! Dense symmetric linear algebra.
//!
//! Kernel matrices, covariances, and graph operators are all symmetric, so
//! this module provides exactly the three primitives the rest of the
//! library needs: a validated symmetric matrix type, a Cholesky
//! factorization for densities and sampling, and a full symmetric
//! eigensolver (Householder tridiagonalization followed by implicit-shift
//! QL, in the classic EISPACK tred2/tql2 formulation). Desk-scale problems
//! do not justify an iterative sparse solver.

use crate::error::{Error, Result};

/// Asymmetry allowed at construction, relative to the largest entry.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Entries smaller than this are treated as zero when fixing eigenvector
/// signs.
pub const SIGN_TOL: f64 = 1e-12;

/// Eigenvalues within this distance of a target count as equal to it.
pub const TAU_EIG: f64 = 1e-8;

/// QL sweeps allowed per eigenvalue before giving up.
const QL_MAX_SWEEPS: usize = 64;

/// A dense symmetric matrix, stored row-major in full.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    n: usize,
    a: Vec<f64>,
}

impl SymMatrix {
    /// Validate symmetry (asymmetry at most [`SYMMETRY_TOL`] times the
    /// largest absolute entry), then store the symmetrized average.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::invalid("matrix must have at least one row"));
        }
        for row in rows {
            if row.len() != n {
                return Err(Error::LengthMismatch {
                    expected: n,
                    got: row.len(),
                });
            }
        }
        let mut max_abs: f64 = 0.0;
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if !v.is_finite() {
                    return Err(Error::NonFinite { row: i, col: j });
                }
                max_abs = max_abs.max(v.abs());
            }
        }
        let tol = SYMMETRY_TOL * max_abs;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let diff = (rows[i][j] - rows[j][i]).abs();
                if diff > tol {
                    return Err(Error::invalid(format!(
                        "asymmetry {diff:.3e} at ({i}, {j}) exceeds {tol:.3e}"
                    )));
                }
                let v = 0.5 * (rows[i][j] + rows[j][i]);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        Ok(SymMatrix { n, a })
    }

    /// Build from a function evaluated only on the upper triangle
    /// (`i <= j`); the lower triangle is mirrored. The function is called
    /// exactly `n (n + 1) / 2` times.
    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        SymMatrix { n, a }
    }

    pub fn zeros(n: usize) -> Self {
        SymMatrix { n, a: vec![0.0; n * n] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut a = vec![0.0; n * n];
        for (i, &v) in diag.iter().enumerate() {
            a[i * n + i] = v;
        }
        SymMatrix { n, a }
    }

    pub fn order(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    /// Set both `(i, j)` and `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.a[i * self.n + j] = v;
        self.a[j * self.n + i] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.a[i * self.n..(i + 1) * self.n]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.a.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.a.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Row sums (the degree vector when this matrix is an adjacency).
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.row(i).iter().sum()).collect()
    }

    /// `diag(s) * M * diag(s)` for a scale vector `s`.
    pub fn scaled_both_sides(&self, s: &[f64]) -> SymMatrix {
        debug_assert_eq!(s.len(), self.n);
        let n = self.n;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                a[i * n + j] = s[i] * self.a[i * n + j] * s[j];
            }
        }
        SymMatrix { n, a }
    }

    /// Add `v` to every diagonal entry.
    pub fn add_diagonal(&mut self, v: f64) {
        for i in 0..self.n {
            self.a[i * self.n + i] += v;
        }
    }

    /// The matrix as a vector of full rows.
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n).map(|i| self.row(i).to_vec()).collect()
    }
}

/// Lower-triangular Cholesky factor of a positive definite matrix.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    log_det: f64,
}

/// Factor `m = L Lᵀ`. Fails with the first non-positive pivot.
pub fn cholesky(m: &SymMatrix) -> Result<Cholesky> {
    let n = m.order();
    let mut l = vec![0.0; n * n];
    let mut log_det = 0.0;
    for j in 0..n {
        let mut diag = m.get(j, j);
        for k in 0..j {
            diag -= l[j * n + k] * l[j * n + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(Error::NotPositiveDefinite {
                index: j,
                pivot: diag,
            });
        }
        let root = diag.sqrt();
        l[j * n + j] = root;
        log_det += 2.0 * root.ln();
        for i in (j + 1)..n {
            let mut v = m.get(i, j);
            for k in 0..j {
                v -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = v / root;
        }
    }
    Ok(Cholesky { n, l, log_det })
}

impl Cholesky {
    pub fn order(&self) -> usize {
        self.n
    }

    pub fn lower(&self, i: usize, j: usize) -> f64 {
        if j <= i {
            self.l[i * self.n + j]
        } else {
            0.0
        }
    }

    /// `ln det(L Lᵀ)`.
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Solve `L y = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            let mut v = b[i];
            for k in 0..i {
                v -= self.l[i * self.n + k] * y[k];
            }
            y[i] = v / self.l[i * self.n + i];
        }
        y
    }

    /// Solve `L Lᵀ x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let y = self.forward_solve(b);
        let mut x = y;
        for i in (0..self.n).rev() {
            let mut v = x[i];
            for k in (i + 1)..self.n {
                v -= self.l[k * self.n + i] * x[k];
            }
            x[i] = v / self.l[i * self.n + i];
        }
        x
    }

    /// `diffᵀ (L Lᵀ)⁻¹ diff`, the squared Mahalanobis norm.
    pub fn mahalanobis_sq(&self, diff: &[f64]) -> f64 {
        self.forward_solve(diff).iter().map(|y| y * y).sum()
    }

    /// `L z`, mapping standard normal draws to the factored covariance.
    pub fn transform(&self, z: &[f64]) -> Vec<f64> {
        debug_assert_eq!(z.len(), self.n);
        (0..self.n)
            .map(|i| (0..=i).map(|k| self.l[i * self.n + k] * z[k]).sum())
            .collect()
    }
}

/// Eigenvalues in descending order with their eigenvectors.
///
/// `vectors[j]` is the unit eigenvector for `values[j]`; its first entry
/// larger than [`SIGN_TOL`] in magnitude is made positive so repeated runs
/// and different route computations produce comparable bases.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

impl EigenPairs {
    /// Entry `i` of every returned eigenvector, as one row of length
    /// `values.len()`.
    pub fn row(&self, i: usize) -> Vec<f64> {
        self.vectors.iter().map(|v| v[i]).collect()
    }
}

/// Full symmetric eigendecomposition, truncated to the `top_k` largest
/// eigenvalues.
///
/// Householder tridiagonalization with accumulated transforms, then QL
/// with implicit shifts; fails with `ConvergenceFailure` if a sweep does
/// not deflate within 64 iterations.
pub fn sym_eig(m: &SymMatrix, top_k: usize) -> Result<EigenPairs> {
    let n = m.order();
    if top_k == 0 || top_k > n {
        return Err(Error::invalid(format!(
            "top_k = {top_k} outside 1..={n}"
        )));
    }
    let mut z = m.to_rows();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut z, &mut d, &mut e);
    ql_implicit(&mut d, &mut e, &mut z)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].partial_cmp(&d[i]).unwrap().then(i.cmp(&j)));
    let mut values = Vec::with_capacity(top_k);
    let mut vectors = Vec::with_capacity(top_k);
    for &col in order.iter().take(top_k) {
        values.push(d[col]);
        let mut v: Vec<f64> = (0..n).map(|row| z[row][col]).collect();
        if let Some(first) = v.iter().find(|x| x.abs() > SIGN_TOL) {
            if *first < 0.0 {
                for x in &mut v {
                    *x = -*x;
                }
            }
        }
        vectors.push(v);
    }
    Ok(EigenPairs { values, vectors })
}

/// Householder reduction to tridiagonal form; `z` accumulates the
/// orthogonal transform, `d` receives the diagonal and `e` the
/// subdiagonal (in `e[1..]`).
fn tridiagonalize(z: &mut [Vec<f64>], d: &mut [f64], e: &mut [f64]) {
    let n = d.len();
    for i in (1..n).rev() {
        let l = i - 1;
        let mut h = 0.0;
        if l > 0 {
            let scale: f64 = z[i][..=l].iter().map(|v| v.abs()).sum();
            if scale == 0.0 {
                e[i] = z[i][l];
            } else {
                for k in 0..=l {
                    z[i][k] /= scale;
                    h += z[i][k] * z[i][k];
                }
                let f = z[i][l];
                let g = if f >= 0.0 { -h.sqrt() } else { h.sqrt() };
                e[i] = scale * g;
                h -= f * g;
                z[i][l] = f - g;
                let mut f_acc = 0.0;
                for j in 0..=l {
                    z[j][i] = z[i][j] / h;
                    let mut g_acc = 0.0;
                    for k in 0..=j {
                        g_acc += z[j][k] * z[i][k];
                    }
                    for k in (j + 1)..=l {
                        g_acc += z[k][j] * z[i][k];
                    }
                    e[j] = g_acc / h;
                    f_acc += e[j] * z[i][j];
                }
                let hh = f_acc / (h + h);
                for j in 0..=l {
                    let f = z[i][j];
                    let g = e[j] - hh * f;
                    e[j] = g;
                    for k in 0..=j {
                        z[j][k] -= f * e[k] + g * z[i][k];
                    }
                }
            }
        } else {
            e[i] = z[i][l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for i in 0..n {
        if d[i] != 0.0 {
            for j in 0..i {
                let mut g = 0.0;
                for k in 0..i {
                    g += z[i][k] * z[k][j];
                }
                for k in 0..i {
                    z[k][j] -= g * z[k][i];
                }
            }
        }
        d[i] = z[i][i];
        z[i][i] = 1.0;
        for j in 0..i {
            z[j][i] = 0.0;
            z[i][j] = 0.0;
        }
    }
}

/// QL iteration with implicit shifts on a symmetric tridiagonal matrix,
/// accumulating rotations into `z`.
fn ql_implicit(d: &mut [f64], e: &mut [f64], z: &mut [Vec<f64>]) -> Result<()> {
    let n = d.len();
    if n == 1 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    // Deflation scale: a purely local test stalls on graded matrices
    // whose leading block is rounding-level noise, so a subdiagonal also
    // deflates once it is negligible against the whole matrix norm.
    let anorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs())
        .fold(0.0f64, f64::max);
    if anorm == 0.0 {
        return Ok(());
    }
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd.max(anorm) {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                return Err(Error::ConvergenceFailure {
                    what: "sym_eig QL sweep",
                    iters: QL_MAX_SWEEPS,
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            let mut underflow = false;
            for i in (l..m).rev() {
                let mut f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for k in 0..n {
                    f = z[k][i + 1];
                    z[k][i + 1] = s * z[k][i] + c * f;
                    z[k][i] = c * z[k][i] - s * f;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}
