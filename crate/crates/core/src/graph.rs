//! Similarity graphs and normalized-cut algebra.
//!
//! A dataset plus a kernel induces a weighted graph: nodes are points,
//! edge weights are kernel values. The normalized cut objective over a
//! partition, `(1/k) sum_c links(V_c, V \ V_c) / links(V_c, V)`, has a
//! matrix form `Tr(Z' D^(-1/2) A D^(-1/2) Z)` with Z the degree-scaled
//! one-hot partition matrix; both routes are implemented so their
//! algebraic identity can be machine-checked.
//!
//! For 0/1 similarity (the heaviside kernel) the matrix `A` carries a
//! unit diagonal, so degrees count the node itself plus its neighbors.
//! Connected components can then be read off two ways: depth-first
//! search over positive edges, or the eigenvectors of the normalized
//! adjacency with eigenvalue one. Both are implemented and must agree.

use std::io;

use crate::assign::HardAssignment;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix, KernelSpec};
use crate::linalg::{sym_eig, SymMatrix, TAU_EIG};

/// Role of a node, assigned by density-based filtering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeLabel {
    Plain,
    Core,
    Unprocessed,
    Outlier,
}

/// Weighted undirected graph over data points.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    pub a: SymMatrix,
    /// `d_i = sum_j A_ij`, diagonal included.
    pub degrees: Vec<f64>,
    pub labels: Vec<NodeLabel>,
    /// Kernel evaluations spent building `a` (0 for premade matrices).
    pub kernel_evals: u64,
}

impl SimilarityGraph {
    /// Wrap an existing similarity matrix. Entries must be nonnegative
    /// and finite.
    pub fn from_similarity(a: SymMatrix) -> Result<Self> {
        let n = a.order();
        for i in 0..n {
            for j in i..n {
                let v = a.get(i, j);
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "similarity ({i}, {j}) = {v} is not a finite nonnegative value"
                    )));
                }
            }
        }
        let degrees = a.row_sums();
        Ok(SimilarityGraph {
            a,
            degrees,
            labels: vec![NodeLabel::Plain; n],
            kernel_evals: 0,
        })
    }

    pub fn n(&self) -> usize {
        self.a.order()
    }

    /// Extract the induced subgraph on `keep` (order preserved),
    /// recomputing degrees on the smaller matrix.
    pub fn subgraph(&self, keep: &[usize]) -> Result<SimilarityGraph> {
        let n = self.n();
        if keep.iter().any(|&i| i >= n) {
            return Err(Error::invalid("subgraph index out of range"));
        }
        let a = SymMatrix::from_fn(keep.len(), |i, j| self.a.get(keep[i], keep[j]));
        let degrees = a.row_sums();
        let labels = keep.iter().map(|&i| self.labels[i]).collect();
        Ok(SimilarityGraph {
            a,
            degrees,
            labels,
            kernel_evals: 0,
        })
    }

    /// One `node_i node_j weight` line per positive off-diagonal edge.
    pub fn write_edge_list<W: io::Write>(&self, w: &mut W) -> io::Result<()> {
        let n = self.n();
        for i in 0..n {
            for j in (i + 1)..n {
                let weight = self.a.get(i, j);
                if weight > 0.0 {
                    writeln!(w, "{i} {j} {weight}")?;
                }
            }
        }
        Ok(())
    }
}

/// Complete graph with `A = kernel_matrix(spec, data)`. For the
/// heaviside kernel the unit diagonal makes this the 0/1 adjacency plus
/// the identity.
pub fn build_graph(data: &Dataset, spec: KernelSpec) -> Result<SimilarityGraph> {
    let km = kernel_matrix(spec, data)?;
    let mut g = SimilarityGraph::from_similarity(km.matrix)?;
    g.kernel_evals = km.evals;
    Ok(g)
}

fn validated_members(g: &SimilarityGraph, partition: &HardAssignment) -> Result<Vec<Vec<usize>>> {
    if partition.n() != g.n() {
        return Err(Error::LengthMismatch {
            expected: g.n(),
            got: partition.n(),
        });
    }
    if partition.outlier_count() > 0 {
        return Err(Error::invalid("partition must cover all nodes"));
    }
    Ok((0..partition.k()).map(|c| partition.members(c)).collect())
}

/// `links(S, T)`: total weight between the node sets, diagonal included
/// when a node is in both.
fn links(g: &SimilarityGraph, from: &[usize], to: &[usize]) -> f64 {
    let mut total = 0.0;
    for &i in from {
        for &j in to {
            total += g.a.get(i, j);
        }
    }
    total
}

/// `(1/k) sum_c links(V_c, V \ V_c) / links(V_c, V)`, the share of each
/// cluster's volume that escapes it. Zero iff no edge crosses clusters.
pub fn normlinks_objective(g: &SimilarityGraph, partition: &HardAssignment) -> Result<f64> {
    let members = validated_members(g, partition)?;
    let k = members.len();
    let mut total = 0.0;
    for (c, inside) in members.iter().enumerate() {
        let volume: f64 = inside.iter().map(|&i| g.degrees[i]).sum();
        if volume <= 0.0 {
            return Err(Error::ZeroVolume { cluster: c });
        }
        let mut in_cluster = vec![false; g.n()];
        for &i in inside {
            in_cluster[i] = true;
        }
        let outside: Vec<usize> = (0..g.n()).filter(|&i| !in_cluster[i]).collect();
        total += links(g, inside, &outside) / volume;
    }
    Ok(total / k as f64)
}

/// Degree-scaled one-hot partition matrix `Z = D^(1/2) U (U' D U)^(-1/2)`
/// with orthonormal columns.
#[derive(Debug, Clone)]
pub struct CutView {
    pub partition: HardAssignment,
    /// Column `c` has entries `sqrt(d_i / vol_c)` on cluster `c`'s nodes.
    pub columns: Vec<Vec<f64>>,
}

impl CutView {
    pub fn new(g: &SimilarityGraph, partition: &HardAssignment) -> Result<CutView> {
        let members = validated_members(g, partition)?;
        let mut columns = Vec::with_capacity(members.len());
        for (c, inside) in members.iter().enumerate() {
            let volume: f64 = inside.iter().map(|&i| g.degrees[i]).sum();
            if volume <= 0.0 {
                return Err(Error::ZeroVolume { cluster: c });
            }
            let mut col = vec![0.0; g.n()];
            for &i in inside {
                col[i] = (g.degrees[i] / volume).sqrt();
            }
            columns.push(col);
        }
        Ok(CutView {
            partition: partition.clone(),
            columns,
        })
    }

    /// Largest deviation of `Z' Z` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (c, a) in self.columns.iter().enumerate() {
            for (e, b) in self.columns.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let target = if c == e { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// `Tr(Z' D^(-1/2) A D^(-1/2) Z)` computed by building both matrices
/// literally. Equals `k (1 - normlinks_objective)` for every partition.
pub fn cut_trace_objective(g: &SimilarityGraph, partition: &HardAssignment) -> Result<f64> {
    let view = CutView::new(g, partition)?;
    let m = normalized_adjacency(g)?;
    let mut trace = 0.0;
    for col in &view.columns {
        let mcol = m.matvec(col);
        trace += col.iter().zip(&mcol).map(|(a, b)| a * b).sum::<f64>();
    }
    Ok(trace)
}

/// Components of the graph with edge set `{A_ij > theta, i != j}`.
/// Component ids follow first-visited node order.
pub fn connected_components_dfs(g: &SimilarityGraph, theta: f64) -> HardAssignment {
    let n = g.n();
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
                if j != i && labels[j] < 0 && g.a.get(i, j) > theta {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    HardAssignment::new(labels).expect("every node was visited")
}

fn inv_sqrt_degrees(degrees: &[f64]) -> Result<Vec<f64>> {
    degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            if d <= 0.0 {
                Err(Error::IsolatedNode { node: i })
            } else {
                Ok(1.0 / d.sqrt())
            }
        })
        .collect()
}

/// `D^(-1/2) A D^(-1/2)`. Its eigenvalue-one eigenvectors indicate
/// connected components.
pub fn normalized_adjacency(g: &SimilarityGraph) -> Result<SymMatrix> {
    let scale = inv_sqrt_degrees(&g.degrees)?;
    Ok(g.a.scaled_both_sides(&scale))
}

/// Unnormalized Laplacian `D - A`.
pub fn laplacian(g: &SimilarityGraph) -> SymMatrix {
    SymMatrix::from_fn(g.n(), |i, j| {
        if i == j {
            g.degrees[i] - g.a.get(i, i)
        } else {
            -g.a.get(i, j)
        }
    })
}

/// `D^(-1/2) (D - A) D^(-1/2) = I - normalized_adjacency`.
pub fn normalized_laplacian(g: &SimilarityGraph) -> Result<SymMatrix> {
    let scale = inv_sqrt_degrees(&g.degrees)?;
    Ok(laplacian(g).scaled_both_sides(&scale))
}

/// Read connected components from the eigenvalue-one eigenspace of the
/// normalized adjacency.
///
/// The basis returned by the solver is an arbitrary rotation of the
/// component indicators, but rows of nodes in one component are always
/// positive multiples of each other, so after row normalization the
/// components are exactly the groups of (near-)identical rows.
pub fn eigenone_components(g: &SimilarityGraph) -> Result<HardAssignment> {
    let m = normalized_adjacency(g)?;
    let eig = sym_eig(&m, g.n())?;
    let picked: Vec<usize> = eig
        .values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - 1.0).abs() <= TAU_EIG)
        .map(|(t, _)| t)
        .collect();
    components_from_eigenbasis(&eig.vectors, &picked, g.n())
}

/// Row-normalize the selected eigenvectors and group equal rows.
fn components_from_eigenbasis(
    vectors: &[Vec<f64>],
    picked: &[usize],
    n: usize,
) -> Result<HardAssignment> {
    if picked.is_empty() {
        return Err(Error::ConvergenceFailure {
            what: "eigenvalue-one selection".into(),
            iters: 0,
        });
    }
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<f64> = picked.iter().map(|&t| vectors[t][i]).collect();
        let norm: f64 = row.iter().map(|v| v * v).sum::<f64>().sqrt();
        for v in &mut row {
            *v /= norm;
        }
        rows.push(row);
    }
    let mut labels = vec![-1i64; n];
    let mut next = 0i64;
    for i in 0..n {
        if labels[i] >= 0 {
            continue;
        }
        labels[i] = next;
        for j in (i + 1)..n {
            if labels[j] >= 0 {
                continue;
            }
            let cosine: f64 = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            if cosine >= 1.0 - 1e-6 {
                labels[j] = next;
            }
        }
        next += 1;
    }
    HardAssignment::new(labels)
}
