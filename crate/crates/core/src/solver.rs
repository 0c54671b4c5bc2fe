//! Correlation matrices over matched graph pairs and the closed-form solver
//! for the multi-channel projections.
//!
//! Minimizing the summed distance bound over `M` pairs reduces to canonical
//! correlation between the two views with kernel-weighted second moments
//!
//! ```text
//! C1  = Σ_m X1ᵀ (K_μ1 + K_Σ1) X1
//! C2  = Σ_m X2ᵀ (K_μ2 + K_Σ2) X2
//! C12 = Σ_m X1ᵀ (K_μ12 + K_Σ12) X2
//! ```
//!
//! whose stationary points satisfy `C1⁻¹C12C2⁻¹C21 w1 = ρ² w1` and
//! `C2⁻¹C21C1⁻¹C12 w2 = ρ² w2`. [`solve`] reaches them through the whitened
//! cross-moment `L1⁻¹ C12 L2⁻ᵀ` (Cholesky factors of the regularized `C1`,
//! `C2`) and its singular value decomposition.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use crate::error::{GwcaError, Result, View};
use crate::graph::{build_laplacian, pad_pair, Graph};
use crate::par;

/// Default projection count cap.
pub const DEFAULT_MAX_CHANNELS: usize = 240;
/// Default relative ridge: `ε_v = DEFAULT_REG * tr(C_v) / D_v`.
pub const DEFAULT_REG: f64 = 1e-6;

const ACCUMULATE_CHUNK: usize = 16;

/// Polynomial order and fusion mode of the filtered features.
///
/// `order` is the number of polynomial terms `K`, so powers `0..K` are in play.
/// With fusion the design matrix is `[L^0 X, L^1 X, ..., L^{K-1} X]`; without
/// it only the top term `L^{K-1} X` is used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OrderConfig {
    order: usize,
    fusion: bool,
}

impl Default for OrderConfig {
    fn default() -> Self {
        OrderConfig { order: 2, fusion: true }
    }
}

impl OrderConfig {
    pub fn new(order: usize, fusion: bool) -> Result<Self> {
        if order == 0 {
            return Err(GwcaError::InvalidConfig("order must be at least 1".into()));
        }
        Ok(OrderConfig { order, fusion })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn fusion(&self) -> bool {
        self.fusion
    }

    pub fn max_power(&self) -> usize {
        self.order - 1
    }

    /// Width `D` of the design matrix for raw feature dimension `d`.
    pub fn design_width(&self, d: usize) -> usize {
        if self.fusion {
            self.order * d
        } else {
            d
        }
    }
}

/// Filtered features of `g` under the normalized Laplacian.
pub fn design_matrix(g: &Graph, cfg: OrderConfig) -> DMatrix<f64> {
    let l = build_laplacian(g, true);
    let n = g.n();
    let d = g.dim();
    let mut current = g.features().clone();
    if !cfg.fusion {
        for _ in 0..cfg.max_power() {
            current = l.matrix() * current;
        }
        return current;
    }
    let mut out = DMatrix::zeros(n, cfg.order * d);
    for k in 0..cfg.order {
        if k > 0 {
            current = l.matrix() * current;
        }
        out.view_mut((0, k * d), (n, d)).copy_from(&current);
    }
    out
}

/// Accumulated correlation matrices of a training set.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrices {
    pub c1: DMatrix<f64>,
    pub c2: DMatrix<f64>,
    pub c12: DMatrix<f64>,
    pub pair_count: usize,
    pub config: OrderConfig,
    /// Raw feature dimensions of the two views.
    pub d1: usize,
    pub d2: usize,
}

impl CorrelationMatrices {
    pub fn c21(&self) -> DMatrix<f64> {
        self.c12.transpose()
    }

    /// Ridge sizes `ε_v = reg * tr(C_v) / D_v` for both views.
    pub fn ridge(&self, reg: f64) -> (f64, f64) {
        let e = |c: &DMatrix<f64>| reg * c.trace() / c.nrows() as f64;
        (e(&self.c1), e(&self.c2))
    }

    /// `(C1 + ε1 I, C2 + ε2 I)`.
    pub fn regularized(&self, reg: f64) -> (DMatrix<f64>, DMatrix<f64>) {
        let (e1, e2) = self.ridge(reg);
        let shift = |c: &DMatrix<f64>, e: f64| c + DMatrix::identity(c.nrows(), c.ncols()) * e;
        (shift(&self.c1, e1), shift(&self.c2, e2))
    }
}

struct Moments {
    c1: DMatrix<f64>,
    c2: DMatrix<f64>,
    c12: DMatrix<f64>,
}

impl Moments {
    fn zeros(dim1: usize, dim2: usize) -> Self {
        Moments { c1: DMatrix::zeros(dim1, dim1), c2: DMatrix::zeros(dim2, dim2), c12: DMatrix::zeros(dim1, dim2) }
    }

    fn add(&mut self, other: &Moments) {
        self.c1 += &other.c1;
        self.c2 += &other.c2;
        self.c12 += &other.c12;
    }
}

/// Mean row and centered copy of a filtered feature matrix.
fn mean_and_centered(p: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
    let n = p.nrows() as f64;
    let mean = p.row_sum() / n;
    let mut centered = p.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    (mean.transpose(), centered)
}

/// Kernel-weighted moments of a single pair.
///
/// With `P = L^k X`, `Xᵀ K_μ X = m mᵀ` where `m` is the column mean of `P`,
/// and `Xᵀ K_Σ X = (1/n) P_cᵀ P_c` for the column-centered `P_c`; the cross
/// terms pair the two views the same way.
fn pair_moments(g1: &Graph, g2: &Graph, cfg: OrderConfig) -> Moments {
    let (g1, g2) = pad_pair(g1, g2);
    let p1 = design_matrix(&g1, cfg);
    let p2 = design_matrix(&g2, cfg);
    let n = g1.n() as f64;
    let (m1, p1c) = mean_and_centered(&p1);
    let (m2, p2c) = mean_and_centered(&p2);
    Moments {
        c1: &m1 * m1.transpose() + p1c.tr_mul(&p1c) / n,
        c2: &m2 * m2.transpose() + p2c.tr_mul(&p2c) / n,
        c12: &m1 * m2.transpose() + p1c.tr_mul(&p2c) / n,
    }
}

/// Sums the per-pair correlation matrices over the training pairs.
///
/// Pairs are padded to a common node count first. Work is spread over pairs;
/// the reduction order is fixed so the result does not depend on threading.
pub fn accumulate(pairs: &[(Graph, Graph)], cfg: OrderConfig) -> Result<CorrelationMatrices> {
    let (first1, first2) = match pairs.first() {
        Some((a, b)) => (a, b),
        None => return Err(GwcaError::Empty("no training pairs".into())),
    };
    let (d1, d2) = (first1.dim(), first2.dim());
    if let Some(m) = pairs.iter().position(|(a, b)| a.dim() != d1 || b.dim() != d2) {
        let (a, b) = &pairs[m];
        return Err(GwcaError::DimensionMismatch(format!(
            "pair {m} has feature dimensions ({}, {}), expected ({d1}, {d2})",
            a.dim(),
            b.dim()
        )));
    }
    let (dim1, dim2) = (cfg.design_width(d1), cfg.design_width(d2));

    let partials = par::map_chunks(pairs, ACCUMULATE_CHUNK, |chunk| {
        let mut acc = Moments::zeros(dim1, dim2);
        for (g1, g2) in chunk {
            acc.add(&pair_moments(g1, g2, cfg));
        }
        acc
    });
    let mut total = Moments::zeros(dim1, dim2);
    for p in &partials {
        total.add(p);
    }
    // the two diagonal blocks are Gram matrices; keep them exactly symmetric
    crate::graph::symmetrize(&mut total.c1);
    crate::graph::symmetrize(&mut total.c2);

    Ok(CorrelationMatrices { c1: total.c1, c2: total.c2, c12: total.c12, pair_count: pairs.len(), config: cfg, d1, d2 })
}

/// Learned projections of both views and their canonical correlations.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationModel {
    /// `D1 x r`, one projection per column.
    pub w1: DMatrix<f64>,
    /// `D2 x r`.
    pub w2: DMatrix<f64>,
    /// Correlations, descending.
    pub rho: Vec<f64>,
    pub config: OrderConfig,
    /// Relative ridge factor the model was solved with.
    pub reg: f64,
    pub d1: usize,
    pub d2: usize,
}

fn factor(c: DMatrix<f64>, view: View, eps: f64) -> Result<DMatrix<f64>> {
    let singular = GwcaError::Singular { view, reg: eps };
    if eps <= 0.0 || !eps.is_finite() {
        return Err(singular);
    }
    let max_diag = c.diagonal().max();
    let chol: Cholesky<f64, Dyn> = Cholesky::new(c).ok_or(GwcaError::Singular { view, reg: eps })?;
    let l = chol.unpack();
    let min_pivot = l.diagonal().map(|v| v * v).min();
    if min_pivot.is_nan() || min_pivot <= 1e-15 * max_diag {
        return Err(singular);
    }
    Ok(l)
}

/// Solves the regularized correlation problem and keeps the `channels`
/// strongest projection pairs (default `min(D1, D2, 240)`).
///
/// `reg` is relative: each view gets `ε_v = reg * tr(C_v) / D_v`, so the
/// correlations do not change when one view's features are rescaled.
/// Columns are normalized to `w_vᵀ C_v w_v = 1` under the regularized
/// matrices, and each pair's sign is fixed so the largest-magnitude entry of
/// `w1` is positive.
pub fn solve(cm: &CorrelationMatrices, reg: f64, channels: Option<usize>) -> Result<CorrelationModel> {
    if reg <= 0.0 || !reg.is_finite() {
        return Err(GwcaError::InvalidConfig(format!("regularization must be positive, got {reg}")));
    }
    let (dim1, dim2) = (cm.c1.nrows(), cm.c2.nrows());
    let max_r = dim1.min(dim2);
    let r = channels.unwrap_or(max_r.min(DEFAULT_MAX_CHANNELS));
    if r == 0 || r > max_r {
        return Err(GwcaError::InvalidConfig(format!("channel count {r} outside 1..={max_r}")));
    }

    let (e1, e2) = cm.ridge(reg);
    let (c1r, c2r) = cm.regularized(reg);
    let l1 = factor(c1r, View::First, e1)?;
    let l2 = factor(c2r, View::Second, e2)?;

    // T = L1⁻¹ C12 L2⁻ᵀ
    let a = l1.solve_lower_triangular(&cm.c12).ok_or(GwcaError::Singular { view: View::First, reg: e1 })?;
    let t = l2
        .solve_lower_triangular(&a.transpose())
        .ok_or(GwcaError::Singular { view: View::Second, reg: e2 })?
        .transpose();

    let svd = t.svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");
    let mut idx: Vec<usize> = (0..svd.singular_values.len()).collect();
    idx.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]).then(i.cmp(&j)));
    idx.truncate(r);

    let u_r = DMatrix::from_fn(dim1, r, |i, c| u[(i, idx[c])]);
    let v_r = DMatrix::from_fn(dim2, r, |i, c| v_t[(idx[c], i)]);
    let mut w1 = l1.tr_solve_lower_triangular(&u_r).ok_or(GwcaError::Singular { view: View::First, reg: e1 })?;
    let mut w2 = l2.tr_solve_lower_triangular(&v_r).ok_or(GwcaError::Singular { view: View::Second, reg: e2 })?;
    let rho: Vec<f64> = idx.iter().map(|&i| svd.singular_values[i]).collect();

    for c in 0..r {
        let col = w1.column(c);
        let pivot = col.iter().copied().fold(0.0f64, |best, v| if v.abs() > best.abs() { v } else { best });
        if pivot < 0.0 {
            w1.column_mut(c).neg_mut();
            w2.column_mut(c).neg_mut();
        }
    }

    Ok(CorrelationModel { w1, w2, rho, config: cm.config, reg, d1: cm.d1, d2: cm.d2 })
}

/// Relative residuals of the two eigen-equations for each returned channel:
/// `‖A w - ρ² w‖ / (‖A‖_F ‖w‖)` with `A = C1⁻¹C12C2⁻¹C21` (resp. the view-2
/// product), all under the model's regularization.
pub fn eigen_residuals(cm: &CorrelationMatrices, model: &CorrelationModel) -> Result<Vec<(f64, f64)>> {
    let (c1r, c2r) = cm.regularized(model.reg);
    let (e1, e2) = cm.ridge(model.reg);
    let ch1 = Cholesky::new(c1r).ok_or(GwcaError::Singular { view: View::First, reg: e1 })?;
    let ch2 = Cholesky::new(c2r).ok_or(GwcaError::Singular { view: View::Second, reg: e2 })?;
    let c21 = cm.c21();
    let a1 = ch1.solve(&(&cm.c12 * ch2.solve(&c21)));
    let a2 = ch2.solve(&(&c21 * ch1.solve(&cm.c12)));
    let (n1, n2) = (a1.norm().max(f64::MIN_POSITIVE), a2.norm().max(f64::MIN_POSITIVE));
    Ok((0..model.channels())
        .map(|c| {
            let rho2 = model.rho[c] * model.rho[c];
            let w1 = model.w1.column(c);
            let w2 = model.w2.column(c);
            let r1 = (&a1 * w1 - w1 * rho2).norm() / (n1 * w1.norm());
            let r2 = (&a2 * w2 - w2 * rho2).norm() / (n2 * w2.norm());
            (r1, r2)
        })
        .collect())
}

impl CorrelationModel {
    pub fn channels(&self) -> usize {
        self.rho.len()
    }

    /// Keeps the first `r` channels.
    pub fn truncated(&self, r: usize) -> Result<CorrelationModel> {
        if r == 0 || r > self.channels() {
            return Err(GwcaError::InvalidConfig(format!("cannot keep {r} of {} channels", self.channels())));
        }
        Ok(CorrelationModel {
            w1: self.w1.columns(0, r).into_owned(),
            w2: self.w2.columns(0, r).into_owned(),
            rho: self.rho[..r].to_vec(),
            ..self.clone()
        })
    }

    pub fn weights(&self, view: View) -> &DMatrix<f64> {
        match view {
            View::First => &self.w1,
            View::Second => &self.w2,
        }
    }

    pub fn feature_dim(&self, view: View) -> usize {
        match view {
            View::First => self.d1,
            View::Second => self.d2,
        }
    }

    /// `n x r` projected signals: column `j` is the filtered design matrix of
    /// `g` times the view's `j`-th projection.
    pub fn project(&self, g: &Graph, view: View) -> Result<DMatrix<f64>> {
        let expected = self.feature_dim(view);
        if g.dim() != expected {
            return Err(GwcaError::DimensionMismatch(format!(
                "{view} graph has {} features, model expects {expected}",
                g.dim()
            )));
        }
        Ok(design_matrix(g, self.config) * self.weights(view))
    }

    pub fn to_json(&self) -> ModelJson {
        let rows = |m: &DMatrix<f64>| m.row_iter().map(|r| r.iter().copied().collect()).collect();
        ModelJson {
            order: self.config.order(),
            fusion: self.config.fusion(),
            reg: self.reg,
            channels: self.channels(),
            rho: self.rho.clone(),
            w1: rows(&self.w1),
            w2: rows(&self.w2),
            d1: self.d1,
            d2: self.d2,
        }
    }

    pub fn from_json(doc: &ModelJson) -> Result<CorrelationModel> {
        let config = OrderConfig::new(doc.order, doc.fusion)?;
        let r = doc.channels;
        if doc.rho.len() != r {
            return Err(GwcaError::InvalidConfig(format!("{} correlations for {r} channels", doc.rho.len())));
        }
        let read = |rows: &[Vec<f64>], d: usize, name: &str| -> Result<DMatrix<f64>> {
            let dim = config.design_width(d);
            if rows.len() != dim || rows.iter().any(|row| row.len() != r) {
                return Err(GwcaError::InvalidConfig(format!("{name} must be {dim}x{r}")));
            }
            Ok(DMatrix::from_fn(dim, r, |i, j| rows[i][j]))
        };
        Ok(CorrelationModel {
            w1: read(&doc.w1, doc.d1, "w1")?,
            w2: read(&doc.w2, doc.d2, "w2")?,
            rho: doc.rho.clone(),
            config,
            reg: doc.reg,
            d1: doc.d1,
            d2: doc.d2,
        })
    }
}

/// Serialized model; matrices are row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelJson {
    pub order: usize,
    pub fusion: bool,
    pub reg: f64,
    pub channels: usize,
    pub rho: Vec<f64>,
    pub w1: Vec<Vec<f64>>,
    pub w2: Vec<Vec<f64>>,
    pub d1: usize,
    pub d2: usize,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::laplacian_powers;
    use crate::wasserstein::build_pair_kernels;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Graph {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if rng.random::<f64>() < 0.4 {
                    edges.push((i, j, rng.random_range(0.1..1.0)));
                }
            }
        }
        let x = DMatrix::from_fn(n, d, |_, _| rng.random_range(-1.0..1.0));
        Graph::from_edges(n, &edges, x).unwrap()
    }

    fn with_features(g: &Graph, x: DMatrix<f64>) -> Graph {
        Graph::new(g.adjacency().clone(), x).unwrap()
    }

    #[test]
    fn design_matrix_layout() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_graph(&mut rng, 6, 2);
        let l = build_laplacian(&g, true);
        let p = laplacian_powers(&l, 2);
        let fused = design_matrix(&g, OrderConfig::new(3, true).unwrap());
        assert_eq!(fused.ncols(), 6);
        for (k, pk) in p.iter().enumerate() {
            assert_abs_diff_eq!(fused.columns(2 * k, 2).into_owned(), pk * g.features(), epsilon = 1e-12);
        }
        let single = design_matrix(&g, OrderConfig::new(3, false).unwrap());
        assert_abs_diff_eq!(single, &p[2] * g.features(), epsilon = 1e-12);
        assert_eq!(design_matrix(&g, OrderConfig::new(1, false).unwrap()), g.features().clone());
    }

    #[test]
    fn duplicated_view_order_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_graph(&mut rng, 7, 3);
        let cm = accumulate(&[(g.clone(), g)], OrderConfig::new(1, false).unwrap()).unwrap();
        assert_abs_diff_eq!(cm.c1, cm.c2, epsilon = 1e-14);
        assert_abs_diff_eq!(cm.c1, cm.c12, epsilon = 1e-14);
        assert_eq!(cm.c21(), cm.c12.transpose());
    }

    #[test]
    fn matches_per_pair_kernel_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let pairs: Vec<(Graph, Graph)> = (0..5)
            .map(|_| {
                let n = rng.random_range(4..9);
                (random_graph(&mut rng, n, 3), random_graph(&mut rng, n, 2))
            })
            .collect();
        for k in 1..=3 {
            let cfg = OrderConfig::new(k, false).unwrap();
            let cm = accumulate(&pairs, cfg).unwrap();
            let mut c1 = DMatrix::zeros(3, 3);
            let mut c2 = DMatrix::zeros(2, 2);
            let mut c12 = DMatrix::zeros(3, 2);
            for (g1, g2) in &pairs {
                let p1 = laplacian_powers(&build_laplacian(g1, true), k - 1);
                let p2 = laplacian_powers(&build_laplacian(g2, true), k - 1);
                let kern = build_pair_kernels(&p1, &p2, k - 1, g1.n(), g2.n()).unwrap();
                let (x1, x2) = (g1.features(), g2.features());
                c1 += x1.transpose() * (&kern.k_mu1 + &kern.k_sigma1) * x1;
                c2 += x2.transpose() * (&kern.k_mu2 + &kern.k_sigma2) * x2;
                c12 += x1.transpose() * (&kern.k_mu12 + &kern.k_sigma12) * x2;
            }
            assert_abs_diff_eq!(cm.c1, c1, epsilon = 1e-10);
            assert_abs_diff_eq!(cm.c2, c2, epsilon = 1e-10);
            assert_abs_diff_eq!(cm.c12, c12, epsilon = 1e-10);
        }
    }

    #[test]
    fn zero_feature_pair_contributes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_graph(&mut rng, 6, 3);
        let b = random_graph(&mut rng, 6, 2);
        let z1 = with_features(&random_graph(&mut rng, 5, 3), DMatrix::zeros(5, 3));
        let z2 = with_features(&random_graph(&mut rng, 5, 2), DMatrix::zeros(5, 2));
        let cfg = OrderConfig::default();
        let one = accumulate(&[(a.clone(), b.clone())], cfg).unwrap();
        let two = accumulate(&[(a, b), (z1, z2)], cfg).unwrap();
        assert_eq!(one.c1, two.c1);
        assert_eq!(one.c12, two.c12);
        assert_eq!(two.pair_count, 2);
    }

    #[test]
    fn accumulate_errors() {
        assert!(matches!(accumulate(&[], OrderConfig::default()), Err(GwcaError::Empty(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pairs = vec![
            (random_graph(&mut rng, 4, 3), random_graph(&mut rng, 4, 2)),
            (random_graph(&mut rng, 4, 2), random_graph(&mut rng, 4, 2)),
        ];
        assert!(matches!(accumulate(&pairs, OrderConfig::default()), Err(GwcaError::DimensionMismatch(_))));
        assert!(OrderConfig::new(0, true).is_err());
    }

    #[test]
    fn identical_views_are_perfectly_correlated() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let pairs: Vec<(Graph, Graph)> = (0..30)
            .map(|_| {
                let g = random_graph(&mut rng, 8, 4);
                (g.clone(), g)
            })
            .collect();
        let cm = accumulate(&pairs, OrderConfig::default()).unwrap();
        let model = solve(&cm, 1e-12, None).unwrap();
        assert_eq!(model.channels(), 8);
        assert!((model.rho[0] - 1.0).abs() < 1e-8, "rho_1 = {}", model.rho[0]);
        for res in eigen_residuals(&cm, &model).unwrap() {
            assert!(res.0 < 1e-6 && res.1 < 1e-6, "{res:?}");
        }
    }

    #[test]
    fn normalization_and_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pairs: Vec<(Graph, Graph)> =
            (0..20).map(|_| (random_graph(&mut rng, 6, 3), random_graph(&mut rng, 6, 4))).collect();
        let cm = accumulate(&pairs, OrderConfig::default()).unwrap();
        let model = solve(&cm, DEFAULT_REG, Some(4)).unwrap();
        let (c1r, c2r) = cm.regularized(DEFAULT_REG);
        for c in 0..4 {
            let w1 = model.w1.column(c);
            let w2 = model.w2.column(c);
            assert!(((w1.transpose() * &c1r * w1)[(0, 0)] - 1.0).abs() < 1e-9);
            assert!(((w2.transpose() * &c2r * w2)[(0, 0)] - 1.0).abs() < 1e-9);
            let corr = (w1.transpose() * &cm.c12 * w2)[(0, 0)];
            assert!((corr - model.rho[c]).abs() < 1e-9);
            let pivot = w1.iter().copied().fold(0.0f64, |b, v| if v.abs() > b.abs() { v } else { b });
            assert!(pivot > 0.0);
        }
        assert!(model.rho.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn solver_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let g = random_graph(&mut rng, 5, 3);
        let zero2 = with_features(&random_graph(&mut rng, 5, 2), DMatrix::zeros(5, 2));
        let cm = accumulate(&[(g.clone(), zero2)], OrderConfig::default()).unwrap();
        match solve(&cm, DEFAULT_REG, None) {
            Err(GwcaError::Singular { view, .. }) => assert_eq!(view, View::Second),
            other => panic!("expected singular view 2, got {other:?}"),
        }
        let cm = accumulate(&[(g.clone(), g)], OrderConfig::default()).unwrap();
        assert!(matches!(solve(&cm, 0.0, None), Err(GwcaError::InvalidConfig(_))));
        assert!(matches!(solve(&cm, DEFAULT_REG, Some(7)), Err(GwcaError::InvalidConfig(_))));
        assert!(matches!(solve(&cm, DEFAULT_REG, Some(0)), Err(GwcaError::InvalidConfig(_))));
    }

    #[test]
    fn project_selector_and_errors() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = random_graph(&mut rng, 6, 3);
        let mut w = DMatrix::zeros(3, 1);
        w[(0, 0)] = 1.0;
        let model = CorrelationModel {
            w1: w.clone(),
            w2: w,
            rho: vec![1.0],
            config: OrderConfig::new(1, false).unwrap(),
            reg: DEFAULT_REG,
            d1: 3,
            d2: 3,
        };
        let p = model.project(&g, View::First).unwrap();
        assert_eq!(p.column(0), g.features().column(0));
        let zero = with_features(&g, DMatrix::zeros(6, 3));
        assert_eq!(model.project(&zero, View::Second).unwrap(), DMatrix::zeros(6, 1));
        let wrong = random_graph(&mut rng, 6, 2);
        assert!(matches!(model.project(&wrong, View::First), Err(GwcaError::DimensionMismatch(_))));
    }

    #[test]
    fn model_json_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let pairs: Vec<(Graph, Graph)> =
            (0..10).map(|_| (random_graph(&mut rng, 5, 3), random_graph(&mut rng, 5, 2))).collect();
        let cm = accumulate(&pairs, OrderConfig::default()).unwrap();
        let model = solve(&cm, DEFAULT_REG, None).unwrap();
        let text = serde_json::to_string(&model.to_json()).unwrap();
        let back = CorrelationModel::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, model);
        let mut bad = model.to_json();
        bad.channels += 1;
        assert!(CorrelationModel::from_json(&bad).is_err());
    }
}
