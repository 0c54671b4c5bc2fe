//! Undirected weighted graphs with node features, their Laplacians and
//! Laplacian powers.
//!
//! Everything is dense: graphs in this domain carry tens of nodes, where
//! dense products beat any sparse bookkeeping.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GwcaError, Result};

/// Asymmetry up to this level is averaged away; anything larger is rejected.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// A graph `G = (V, A, X)` with `n` nodes, a symmetric nonnegative adjacency
/// with zero diagonal, and an `n x d` feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: DMatrix<f64>,
    features: DMatrix<f64>,
}

impl Graph {
    pub fn new(adjacency: DMatrix<f64>, features: DMatrix<f64>) -> Result<Self> {
        let n = adjacency.nrows();
        if n == 0 {
            return Err(GwcaError::InvalidGraph("graph has no nodes".into()));
        }
        if adjacency.ncols() != n {
            return Err(GwcaError::InvalidGraph(format!("adjacency is {}x{}, expected square", n, adjacency.ncols())));
        }
        if features.nrows() != n {
            return Err(GwcaError::InvalidGraph(format!("features have {} rows for {} nodes", features.nrows(), n)));
        }
        if features.ncols() == 0 {
            return Err(GwcaError::InvalidGraph("feature dimension is zero".into()));
        }
        if let Some(v) = features.iter().find(|v| !v.is_finite()) {
            return Err(GwcaError::InvalidGraph(format!("non-finite feature value {v}")));
        }

        let mut adjacency = adjacency;
        for i in 0..n {
            if adjacency[(i, i)] != 0.0 {
                return Err(GwcaError::InvalidGraph(format!(
                    "nonzero diagonal entry {} at node {i}",
                    adjacency[(i, i)]
                )));
            }
            for j in (i + 1)..n {
                let (a, b) = (adjacency[(i, j)], adjacency[(j, i)]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(GwcaError::InvalidGraph(format!("non-finite weight at ({i}, {j})")));
                }
                if (a - b).abs() > SYMMETRY_TOL {
                    return Err(GwcaError::InvalidGraph(format!(
                        "adjacency is not symmetric at ({i}, {j}): {a} vs {b}"
                    )));
                }
                let w = 0.5 * (a + b);
                if w < 0.0 {
                    return Err(GwcaError::InvalidGraph(format!("negative weight {w} at ({i}, {j})")));
                }
                adjacency[(i, j)] = w;
                adjacency[(j, i)] = w;
            }
        }
        Ok(Graph { adjacency, features })
    }

    /// Builds a graph from an undirected edge list (each pair listed once).
    pub fn from_edges(n: usize, edges: &[(usize, usize, f64)], features: DMatrix<f64>) -> Result<Self> {
        let mut adjacency = DMatrix::zeros(n, n);
        for &(i, j, w) in edges {
            if i >= n || j >= n {
                return Err(GwcaError::InvalidGraph(format!("edge ({i}, {j}) out of range for {n} nodes")));
            }
            if i == j {
                return Err(GwcaError::InvalidGraph(format!("self loop at node {i}")));
            }
            if w <= 0.0 || !w.is_finite() {
                return Err(GwcaError::InvalidGraph(format!("edge ({i}, {j}) has non-positive weight {w}")));
            }
            if adjacency[(i, j)] != 0.0 {
                return Err(GwcaError::InvalidGraph(format!("edge ({i}, {j}) listed twice")));
            }
            adjacency[(i, j)] = w;
            adjacency[(j, i)] = w;
        }
        Graph::new(adjacency, features)
    }

    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    /// Feature dimension `d`.
    pub fn dim(&self) -> usize {
        self.features.ncols()
    }

    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.adjacency
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    /// Edge list with `i < j`, in row-major order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let w = self.adjacency[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adjacency.row_iter().map(|r| r.iter().sum()).collect()
    }

    /// Extends the graph to `n` nodes with isolated, zero-featured nodes.
    pub fn padded(&self, n: usize) -> Graph {
        let cur = self.n();
        if n <= cur {
            return self.clone();
        }
        let mut adjacency = DMatrix::zeros(n, n);
        adjacency.view_mut((0, 0), (cur, cur)).copy_from(&self.adjacency);
        let mut features = DMatrix::zeros(n, self.dim());
        features.view_mut((0, 0), (cur, self.dim())).copy_from(&self.features);
        Graph { adjacency, features }
    }

    /// Applies a node permutation: node `i` of the result is node `perm[i]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Graph> {
        let n = self.n();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(GwcaError::InvalidGraph("not a permutation of the node set".into()));
        }
        let adjacency = DMatrix::from_fn(n, n, |i, j| self.adjacency[(perm[i], perm[j])]);
        let features = DMatrix::from_fn(n, self.dim(), |i, c| self.features[(perm[i], c)]);
        Ok(Graph { adjacency, features })
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            n: self.n(),
            edges: self.edges(),
            features: self.features.row_iter().map(|r| r.iter().copied().collect()).collect(),
        }
    }

    pub fn from_json(doc: &GraphJson) -> Result<Graph> {
        if doc.features.len() != doc.n {
            return Err(GwcaError::InvalidGraph(format!("{} feature rows for n = {}", doc.features.len(), doc.n)));
        }
        let d = doc.features.first().map_or(0, Vec::len);
        if let Some((i, _)) = doc.features.iter().enumerate().find(|(_, r)| r.len() != d) {
            return Err(GwcaError::InvalidGraph(format!("feature row {i} has inconsistent length")));
        }
        if let Some(&(i, j, _)) = doc.edges.iter().find(|(i, j, _)| i >= j) {
            return Err(GwcaError::InvalidGraph(format!("edge ({i}, {j}) must satisfy i < j")));
        }
        let features = DMatrix::from_fn(doc.n, d, |i, c| doc.features[i][c]);
        Graph::from_edges(doc.n, &doc.edges, features)
    }
}

/// On-disk graph document:
/// `{"n": .., "edges": [[i, j, w], ...], "features": [[...], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    pub features: Vec<Vec<f64>>,
}

/// A graph Laplacian, either `D - A` or `I - D^{-1/2} A D^{-1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian {
    matrix: DMatrix<f64>,
    normalized: bool,
}

impl Laplacian {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }
}

/// Builds the (optionally symmetric-normalized) Laplacian of `g`.
///
/// Isolated nodes get `D^{-1/2} = 0`, so their rows of the normalized
/// Laplacian are identity rows.
pub fn build_laplacian(g: &Graph, normalized: bool) -> Laplacian {
    let n = g.n();
    let a = g.adjacency();
    let deg = g.degrees();
    let matrix = if normalized {
        let inv_sqrt: Vec<f64> = deg.iter().map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 }).collect();
        DMatrix::from_fn(n, n, |i, j| {
            let off = a[(i, j)] * inv_sqrt[i] * inv_sqrt[j];
            if i == j {
                1.0 - off
            } else {
                -off
            }
        })
    } else {
        DMatrix::from_fn(n, n, |i, j| if i == j { deg[i] } else { -a[(i, j)] })
    };
    Laplacian { matrix, normalized }
}

/// Returns `[L^0, L^1, ..., L^k_max]`.
pub fn laplacian_powers(l: &Laplacian, k_max: usize) -> Vec<DMatrix<f64>> {
    let n = l.n();
    let mut out = Vec::with_capacity(k_max + 1);
    out.push(DMatrix::identity(n, n));
    for k in 1..=k_max {
        let mut next = &out[k - 1] * l.matrix();
        // powers of a symmetric matrix are symmetric; drop the rounding skew
        symmetrize(&mut next);
        out.push(next);
    }
    out
}

pub(crate) fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

/// Pads the smaller graph of a pair with isolated zero-featured nodes so both
/// have `max(n1, n2)` nodes. Feature dimensions are untouched.
pub fn pad_pair(g1: &Graph, g2: &Graph) -> (Graph, Graph) {
    let n = g1.n().max(g2.n());
    (g1.padded(n), g2.padded(n))
}
