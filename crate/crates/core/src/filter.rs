//! Graph Fourier transform and polynomial spectral filters.
//!
//! A filter with frequency response `F(λ) = Σ_k θ_k λ^k` can be evaluated in
//! two ways: in the Laplacian eigenbasis (`U diag(F(λ)) Uᵀ x`) or directly as
//! `Σ_k θ_k L^k x`. The two are identical for polynomial responses. The
//! eigenbasis route needs a full eigendecomposition and is kept for checking;
//! [`polynomial_filter`] is what the rest of the crate uses.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GwcaError, Result};
use crate::graph::Laplacian;

/// Per-order, per-channel filter coefficients `Θ` (`K x d`). Row `k` is the
/// weight vector applied to `L^k X`.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterSpec {
    coeffs: DMatrix<f64>,
}

impl FilterSpec {
    pub fn new(coeffs: DMatrix<f64>) -> Result<Self> {
        if coeffs.nrows() == 0 || coeffs.ncols() == 0 {
            return Err(GwcaError::InvalidConfig("filter needs at least one order and one channel".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(GwcaError::InvalidConfig("filter coefficients must be finite".into()));
        }
        Ok(FilterSpec { coeffs })
    }

    /// Single-channel filter from scalar coefficients `θ_0..θ_{K-1}`.
    pub fn scalar(theta: &[f64]) -> Result<Self> {
        FilterSpec::new(DMatrix::from_column_slice(theta.len(), 1, theta))
    }

    /// Number of polynomial terms `K` (powers `0..K`).
    pub fn order(&self) -> usize {
        self.coeffs.nrows()
    }

    pub fn channels(&self) -> usize {
        self.coeffs.ncols()
    }

    pub fn coeffs(&self) -> &DMatrix<f64> {
        &self.coeffs
    }

    /// Coefficients of order `k` across channels.
    pub fn order_weights(&self, k: usize) -> DVector<f64> {
        self.coeffs.row(k).transpose()
    }
}

/// Eigendecomposition `L = U Λ Uᵀ` of a Laplacian.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<f64>,
}

impl Spectrum {
    pub fn of(l: &Laplacian) -> Spectrum {
        let eig = SymmetricEigen::new(l.matrix().clone());
        // the Laplacian is PSD; rounding can push the null eigenvalue just below 0
        let eigenvalues = eig.eigenvalues.map(|v| if v < 0.0 && v > -1e-9 { 0.0 } else { v });
        Spectrum { eigenvalues, eigenvectors: eig.eigenvectors }
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(GwcaError::DimensionMismatch(format!(
                "signal of length {len} on a graph with {} nodes",
                self.n()
            )));
        }
        Ok(())
    }
}

/// `x̂ = Uᵀ x`.
pub fn graph_fourier(spec: &Spectrum, x: &DVector<f64>) -> Result<DVector<f64>> {
    spec.check_len(x.len())?;
    Ok(spec.eigenvectors.tr_mul(x))
}

/// `x = U x̂`.
pub fn inverse_fourier(spec: &Spectrum, x_hat: &DVector<f64>) -> Result<DVector<f64>> {
    spec.check_len(x_hat.len())?;
    Ok(&spec.eigenvectors * x_hat)
}

/// Evaluates `F(λ) = Σ_k θ_k λ^k` by Horner's rule.
pub fn frequency_response(theta: &[f64], lambda: f64) -> f64 {
    theta.iter().rev().fold(0.0, |acc, &t| acc * lambda + t)
}

/// Exact frequency-domain filtering `U diag(F(λ_1), ..., F(λ_n)) Uᵀ x`.
pub fn spectral_filter(spec: &Spectrum, theta: &[f64], x: &DVector<f64>) -> Result<DVector<f64>> {
    let mut x_hat = graph_fourier(spec, x)?;
    for (c, &lambda) in x_hat.iter_mut().zip(spec.eigenvalues.iter()) {
        *c *= frequency_response(theta, lambda);
    }
    inverse_fourier(spec, &x_hat)
}

/// Multi-channel polynomial filter `z = Σ_k L^k X w^(k)`, one output channel.
///
/// `powers` must hold at least `K` matrices `L^0, L^1, ...`.
pub fn polynomial_filter(powers: &[DMatrix<f64>], f: &FilterSpec, x: &DMatrix<f64>) -> Result<DVector<f64>> {
    if powers.len() < f.order() {
        return Err(GwcaError::DimensionMismatch(format!(
            "filter of order {} needs {} Laplacian powers, got {}",
            f.order(),
            f.order(),
            powers.len()
        )));
    }
    if x.ncols() != f.channels() {
        return Err(GwcaError::DimensionMismatch(format!(
            "features have {} channels, filter expects {}",
            x.ncols(),
            f.channels()
        )));
    }
    let n = x.nrows();
    let mut z = DVector::zeros(n);
    for (k, lk) in powers.iter().take(f.order()).enumerate() {
        if lk.nrows() != n || lk.ncols() != n {
            return Err(GwcaError::DimensionMismatch(format!(
                "L^{k} is {}x{} but features have {n} rows",
                lk.nrows(),
                lk.ncols()
            )));
        }
        let xw = x * f.order_weights(k);
        z += lk * xw;
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_laplacian, laplacian_powers, Graph};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_laplacian(rng: &mut ChaCha8Rng, n: usize) -> Laplacian {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.35 {
                    edges.push((i, j, rng.random_range(0.1..1.0)));
                }
            }
        }
        let g = Graph::from_edges(n, &edges, DMatrix::zeros(n, 1)).unwrap();
        build_laplacian(&g, true)
    }

    #[test]
    fn spectrum_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let l = random_laplacian(&mut rng, 12);
        let s = Spectrum::of(&l);
        let u = s.eigenvectors();
        assert_abs_diff_eq!(u.tr_mul(u), DMatrix::identity(12, 12), epsilon = 1e-8);
        let rebuilt = u * DMatrix::from_diagonal(s.eigenvalues()) * u.transpose();
        assert_abs_diff_eq!(rebuilt, l.matrix().clone(), epsilon = 1e-8);
        assert!(s.eigenvalues().iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn fourier_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let l = random_laplacian(&mut rng, 12);
        let s = Spectrum::of(&l);
        assert_eq!(graph_fourier(&s, &DVector::zeros(12)).unwrap(), DVector::zeros(12));

        let u1 = s.eigenvectors().column(0).into_owned();
        let e1 = graph_fourier(&s, &u1).unwrap();
        let mut expected = DVector::zeros(12);
        expected[0] = 1.0;
        assert_abs_diff_eq!(e1, expected, epsilon = 1e-12);

        let x = DVector::from_fn(12, |_, _| rng.random_range(-1.0..1.0));
        let back = inverse_fourier(&s, &graph_fourier(&s, &x).unwrap()).unwrap();
        assert!((back - &x).norm() < 1e-10);

        assert!(matches!(graph_fourier(&s, &DVector::zeros(3)), Err(GwcaError::DimensionMismatch(_))));
    }

    #[test]
    fn trivial_responses() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let l = random_laplacian(&mut rng, 9);
        let s = Spectrum::of(&l);
        let x = DVector::from_fn(9, |_, _| rng.random_range(-1.0..1.0));
        assert_abs_diff_eq!(spectral_filter(&s, &[1.0, 0.0, 0.0], &x).unwrap(), x.clone(), epsilon = 1e-12);

        let edgeless = Graph::from_edges(9, &[], DMatrix::zeros(9, 1)).unwrap();
        let s = Spectrum::of(&build_laplacian(&edgeless, true));
        assert_abs_diff_eq!(spectral_filter(&s, &[0.0, 1.0], &x).unwrap(), x, epsilon = 1e-12);
    }

    #[test]
    fn polynomial_identity_term_and_zero_input() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let l = random_laplacian(&mut rng, 7);
        let powers = laplacian_powers(&l, 3);
        let x = DMatrix::from_fn(7, 1, |_, _| rng.random_range(-1.0..1.0));
        let f = FilterSpec::scalar(&[1.0, 0.0, 0.0]).unwrap();
        assert_eq!(polynomial_filter(&powers, &f, &x).unwrap(), x.column(0).into_owned());

        let f = FilterSpec::new(DMatrix::from_fn(3, 4, |_, _| rng.random_range(-1.0..1.0))).unwrap();
        let z = polynomial_filter(&powers, &f, &DMatrix::zeros(7, 4)).unwrap();
        assert_eq!(z, DVector::zeros(7));

        assert!(polynomial_filter(&powers, &f, &DMatrix::zeros(7, 3)).is_err());
        let too_high = FilterSpec::new(DMatrix::zeros(5, 4)).unwrap();
        assert!(polynomial_filter(&powers, &too_high, &DMatrix::zeros(7, 4)).is_err());
    }

    #[test]
    fn horner() {
        assert_eq!(frequency_response(&[1.0, 2.0, 3.0], 2.0), 1.0 + 4.0 + 12.0);
        assert_eq!(frequency_response(&[], 2.0), 0.0);
    }
}
