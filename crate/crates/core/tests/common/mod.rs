//! Independent reference computations used by the integration tests.
//!
//! Nothing here calls the routines it is used to check: statistics are
//! two-pass loops, Laplacians come from explicit degree matrices, CCA goes
//! through eigen-based whitening, and the product-matrix eigenvalues come from
//! a general (non-symmetric) Schur decomposition.
#![allow(dead_code)]

use gwca_core::Graph;
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Graph {
    let density = rng.random_range(0.05..0.8);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(0.05..2.0)));
            }
        }
    }
    let x = DMatrix::from_fn(n, d, |_, _| normal(rng));
    Graph::from_edges(n, &edges, x).unwrap()
}

pub fn with_features(g: &Graph, x: DMatrix<f64>) -> Graph {
    Graph::new(g.adjacency().clone(), x).unwrap()
}

/// `I - D^{-1/2} A D^{-1/2}` from explicit diagonal matrices.
pub fn normalized_laplacian(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let a = g.adjacency();
    let d_inv_sqrt = DMatrix::from_fn(n, n, |i, j| {
        if i != j {
            return 0.0;
        }
        let deg: f64 = a.row(i).iter().sum();
        if deg > 0.0 {
            1.0 / deg.sqrt()
        } else {
            0.0
        }
    });
    DMatrix::identity(n, n) - &d_inv_sqrt * a * &d_inv_sqrt
}

pub fn matrix_power(l: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(l.nrows(), l.ncols());
    for _ in 0..k {
        out = &out * l;
    }
    out
}

/// Two-pass population mean and variance.
pub fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

/// Squared W2 between two 1-D Gaussians given as (mean, variance).
pub fn w2_scalar(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1.max(0.0).sqrt() - b.1.max(0.0).sqrt()).powi(2)
}

/// Quantile-coupling transport cost between two equal-size samples: sort
/// both and average the squared differences of matched order statistics.
pub fn sorted_sample_w2(mut a: Vec<f64>, mut b: Vec<f64>) -> f64 {
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    a.iter().zip(&b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// `M^{-1/2}` via symmetric eigendecomposition.
pub fn inv_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m.clone());
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| 1.0 / v.sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Textbook CCA of centered data matrices (rows are samples), with ridge
/// `reg * tr(S)/D` on each covariance. Returns correlations, descending.
pub fn textbook_cca(x: &DMatrix<f64>, y: &DMatrix<f64>, reg: f64) -> Vec<f64> {
    let center = |m: &DMatrix<f64>| {
        let mean = m.row_sum() / m.nrows() as f64;
        let mut c = m.clone();
        for mut row in c.row_iter_mut() {
            row -= &mean;
        }
        c
    };
    let (xc, yc) = (center(x), center(y));
    let ridge = |s: DMatrix<f64>| {
        let e = reg * s.trace() / s.nrows() as f64;
        &s + DMatrix::identity(s.nrows(), s.ncols()) * e
    };
    let sxx = ridge(xc.tr_mul(&xc));
    let syy = ridge(yc.tr_mul(&yc));
    let sxy = xc.tr_mul(&yc);
    let t = inv_sqrt(&sxx) * sxy * inv_sqrt(&syy);
    let mut s: Vec<f64> = t.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Eigenvalues of the explicitly formed `C1⁻¹ C12 C2⁻¹ C21`, descending
/// (real parts; the product is similar to a PSD matrix).
pub fn product_matrix_eigenvalues(c1: &DMatrix<f64>, c2: &DMatrix<f64>, c12: &DMatrix<f64>) -> Vec<f64> {
    let c1_inv = c1.clone().try_inverse().expect("C1 invertible");
    let c2_inv = c2.clone().try_inverse().expect("C2 invertible");
    let a = c1_inv * c12 * c2_inv * c12.transpose();
    let mut ev: Vec<f64> = a.complex_eigenvalues().iter().map(|z| z.re).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(rng))
}
