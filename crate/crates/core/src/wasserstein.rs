//! Gaussian 2-Wasserstein distance between filtered graph signals, the kernel
//! matrices that express its terms as quadratic forms in the filter weights,
//! and the Cauchy-type upper bound that turns it into a correlation objective.
//!
//! Naming: [`w2_gaussian`] returns the squared form
//! `(μ1 - μ2)² + (√Σ1 - √Σ2)²`; [`w2_distance`] returns its square root,
//! which is the actual metric.

use nalgebra::{DMatrix, DVector};

use crate::error::{GwcaError, Result};

/// Variances in `[-VARIANCE_CLAMP, 0)` are rounding noise and read as zero.
pub const VARIANCE_CLAMP: f64 = 1e-12;

/// Population mean and variance of a node signal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalStats {
    pub mean: f64,
    pub variance: f64,
    pub count: usize,
}

impl SignalStats {
    pub fn new(mean: f64, variance: f64, count: usize) -> Self {
        SignalStats { mean, variance: clamp_variance(variance), count }
    }

    pub fn std_dev(&self) -> f64 {
        self.variance.sqrt()
    }
}

fn clamp_variance(v: f64) -> f64 {
    if (-VARIANCE_CLAMP..0.0).contains(&v) {
        0.0
    } else {
        v.max(0.0)
    }
}

/// Population statistics (divide by `n`) of a signal, via Welford's update.
pub fn signal_stats(x: &[f64]) -> Result<SignalStats> {
    if x.is_empty() {
        return Err(GwcaError::Empty("signal has no nodes".into()));
    }
    let mut mean = 0.0;
    let mut m2 = 0.0;
    for (i, &v) in x.iter().enumerate() {
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    Ok(SignalStats::new(mean, m2 / x.len() as f64, x.len()))
}

/// Squared 2-Wasserstein distance between 1-D Gaussians.
pub fn w2_gaussian(s1: &SignalStats, s2: &SignalStats) -> f64 {
    let dm = s1.mean - s2.mean;
    let ds = s1.std_dev() - s2.std_dev();
    dm * dm + ds * ds
}

/// The 2-Wasserstein metric, `sqrt(w2_gaussian)`.
pub fn w2_distance(s1: &SignalStats, s2: &SignalStats) -> f64 {
    w2_gaussian(s1, s2).sqrt()
}

/// The six kernel matrices of one padded graph pair at polynomial order `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairKernels {
    pub k_mu1: DMatrix<f64>,
    pub k_mu2: DMatrix<f64>,
    pub k_mu12: DMatrix<f64>,
    pub k_sigma1: DMatrix<f64>,
    pub k_sigma2: DMatrix<f64>,
    pub k_sigma12: DMatrix<f64>,
    pub order: usize,
}

/// `H L^k` with `H = I - 11ᵀ/n`: subtracts each column's mean.
fn center_columns(m: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = m.clone();
    let n = m.nrows() as f64;
    for mut col in out.column_iter_mut() {
        let mean = col.sum() / n;
        col.add_scalar_mut(-mean);
    }
    out
}

/// Builds the kernel matrices from precomputed Laplacian powers.
///
/// `K_μ1 = (1/n1²) Lᵀ11ᵀL`, `K_Σ1 = (1/n1)(HL)ᵀ(HL)`,
/// `K_μ12 = (1/(n1 n2)) L1ᵀ11ᵀL2`, `K_Σ12 = (1/√(n1 n2)) (H L1)ᵀ(H L2)`,
/// with `L = L^k` throughout. The cross terms need a node correspondence, so
/// both graphs must already have the same node count.
pub fn build_pair_kernels(
    powers1: &[DMatrix<f64>],
    powers2: &[DMatrix<f64>],
    k: usize,
    n1: usize,
    n2: usize,
) -> Result<PairKernels> {
    if n1 != n2 {
        return Err(GwcaError::SizeMismatch { n1, n2 });
    }
    let (l1, l2) = match (powers1.get(k), powers2.get(k)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(GwcaError::DimensionMismatch(format!(
                "order {k} requested but only {} and {} powers supplied",
                powers1.len(),
                powers2.len()
            )))
        }
    };
    for (m, n, which) in [(l1, n1, "first"), (l2, n2, "second")] {
        if m.nrows() != n || m.ncols() != n {
            return Err(GwcaError::DimensionMismatch(format!(
                "{which} L^{k} is {}x{}, expected {n}x{n}",
                m.nrows(),
                m.ncols()
            )));
        }
    }
    let nf1 = n1 as f64;
    let nf2 = n2 as f64;

    // Lᵀ1 / n: the mean functional of the filtered signal
    let a1: DVector<f64> = l1.tr_mul(&DVector::from_element(n1, 1.0)) / nf1;
    let a2: DVector<f64> = l2.tr_mul(&DVector::from_element(n2, 1.0)) / nf2;
    let c1 = center_columns(l1);
    let c2 = center_columns(l2);

    Ok(PairKernels {
        k_mu1: &a1 * a1.transpose(),
        k_mu2: &a2 * a2.transpose(),
        k_mu12: &a1 * a2.transpose(),
        k_sigma1: c1.tr_mul(&c1) / nf1,
        k_sigma2: c2.tr_mul(&c2) / nf2,
        k_sigma12: c1.tr_mul(&c2) / (nf1 * nf2).sqrt(),
        order: k,
    })
}

/// Both sides of the Cauchy step `(Σ1 Σ2)^{1/2} >= (1/√(n1 n2)) x1'ᵀ x2'` for
/// already-centered signals. Returns `(lhs, rhs)`.
pub fn cauchy_cross_bound(x1c: &[f64], x2c: &[f64]) -> Result<(f64, f64)> {
    if x1c.len() != x2c.len() {
        return Err(GwcaError::SizeMismatch { n1: x1c.len(), n2: x2c.len() });
    }
    if x1c.is_empty() {
        return Err(GwcaError::Empty("centered signals have no nodes".into()));
    }
    let n = x1c.len() as f64;
    let ss1: f64 = x1c.iter().map(|v| v * v).sum();
    let ss2: f64 = x2c.iter().map(|v| v * v).sum();
    let dot: f64 = x1c.iter().zip(x2c).map(|(a, b)| a * b).sum();
    let lhs = (ss1 / n * ss2 / n).sqrt();
    Ok((lhs, dot / n))
}

fn quad(x: &DMatrix<f64>, w: &DVector<f64>, k: &DMatrix<f64>, y: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    let left = x * w;
    let right = y * v;
    left.dot(&(k * right))
}

/// Upper bound on the squared distance between the filtered signals
/// `L1^k X1 w1` and `L2^k X2 w2`:
/// `w1ᵀX1ᵀ(K_μ1+K_Σ1)X1w1 + w2ᵀX2ᵀ(K_μ2+K_Σ2)X2w2 - 2 w1ᵀX1ᵀ(K_μ12+K_Σ12)X2w2`.
pub fn w2_upper_bound(
    kernels: &PairKernels,
    x1: &DMatrix<f64>,
    x2: &DMatrix<f64>,
    w1: &DVector<f64>,
    w2: &DVector<f64>,
) -> Result<f64> {
    let n1 = kernels.k_mu1.nrows();
    let n2 = kernels.k_mu2.nrows();
    if x1.nrows() != n1 || x2.nrows() != n2 {
        return Err(GwcaError::DimensionMismatch(format!(
            "features have {} and {} rows, kernels expect {n1} and {n2}",
            x1.nrows(),
            x2.nrows()
        )));
    }
    if x1.ncols() != w1.len() || x2.ncols() != w2.len() {
        return Err(GwcaError::DimensionMismatch(format!(
            "weights of length {} and {} for {} and {} feature channels",
            w1.len(),
            w2.len(),
            x1.ncols(),
            x2.ncols()
        )));
    }
    let k1 = &kernels.k_mu1 + &kernels.k_sigma1;
    let k2 = &kernels.k_mu2 + &kernels.k_sigma2;
    let k12 = &kernels.k_mu12 + &kernels.k_sigma12;
    Ok(quad(x1, w1, &k1, x1, w1) + quad(x2, w2, &k2, x2, w2) - 2.0 * quad(x1, w1, &k12, x2, w2))
}

/// Exact squared distance between filtered signals, computed from the signals
/// themselves rather than through kernels.
pub fn filtered_w2(
    l1k: &DMatrix<f64>,
    x1: &DMatrix<f64>,
    w1: &DVector<f64>,
    l2k: &DMatrix<f64>,
    x2: &DMatrix<f64>,
    w2: &DVector<f64>,
) -> Result<f64> {
    if l1k.ncols() != x1.nrows() || l2k.ncols() != x2.nrows() || x1.ncols() != w1.len() || x2.ncols() != w2.len() {
        return Err(GwcaError::DimensionMismatch("inconsistent filter inputs".into()));
    }
    let z1 = l1k * (x1 * w1);
    let z2 = l2k * (x2 * w2);
    Ok(w2_gaussian(&signal_stats(z1.as_slice())?, &signal_stats(z2.as_slice())?))
}
