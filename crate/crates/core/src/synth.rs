//! Deterministic data sources: correlated cross-view graph pairs, and
//! similarity graphs built from per-node embeddings.
//!
//! Generation uses ChaCha8 seeded from a `u64`, so a config and seed produce
//! the same graphs on every platform.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{GwcaError, Result};
use crate::graph::Graph;

/// How view-2 features are derived from view-1 features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Mixing {
    /// `T` has i.i.d. `N(0, 1/d1)` entries.
    #[default]
    Random,
    /// `T` is the (possibly rectangular) identity.
    Identity,
}

impl std::str::FromStr for Mixing {
    type Err = GwcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "random" => Ok(Mixing::Random),
            "identity" => Ok(Mixing::Identity),
            other => Err(GwcaError::InvalidConfig(format!("unknown mixing {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub pairs: usize,
    pub min_nodes: usize,
    pub max_nodes: usize,
    pub d1: usize,
    pub d2: usize,
    pub mixing: Mixing,
    /// Standard deviation of the additive view-2 feature noise.
    pub noise: f64,
    /// Probability that any node pair is connected.
    pub edge_density: f64,
    /// Probability of flipping each node pair's edge state in view 2.
    pub topology_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            pairs: 100,
            min_nodes: 20,
            max_nodes: 40,
            d1: 16,
            d2: 12,
            mixing: Mixing::Random,
            noise: 0.0,
            edge_density: 0.2,
            topology_noise: 0.0,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(GwcaError::InvalidConfig(m));
        if self.min_nodes == 0 || self.min_nodes > self.max_nodes {
            return bad(format!("invalid node range {}..{}", self.min_nodes, self.max_nodes));
        }
        if self.d1 == 0 || self.d2 == 0 {
            return bad("feature dimensions must be positive".into());
        }
        if self.noise < 0.0 || !self.noise.is_finite() {
            return bad(format!("noise must be a finite value >= 0, got {}", self.noise));
        }
        if !(self.edge_density > 0.0 && self.edge_density <= 1.0) {
            return bad(format!("edge density must lie in (0, 1], got {}", self.edge_density));
        }
        if !(0.0..=1.0).contains(&self.topology_noise) {
            return bad(format!("topology noise must lie in [0, 1], got {}", self.topology_noise));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthPair {
    pub id: String,
    pub view1: Graph,
    pub view2: Graph,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthDataset {
    /// The `d1 x d2` mixing matrix `T`.
    pub mixing: DMatrix<f64>,
    pub pairs: Vec<SynthPair>,
}

fn weight(rng: &mut ChaCha8Rng) -> f64 {
    // uniform on (0, 1]
    1.0 - rng.random::<f64>()
}

/// Generates `cfg.pairs` matched pairs with aligned node orders:
/// view 2 shares view 1's topology (up to `topology_noise` flips) and has
/// features `X1 T + noise * Z`.
pub fn generate_pairs(cfg: &SynthConfig) -> Result<SynthDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let scale = 1.0 / (cfg.d1 as f64).sqrt();
    let mixing = match cfg.mixing {
        Mixing::Random => DMatrix::from_fn(cfg.d1, cfg.d2, |_, _| scale * rng.sample::<f64, _>(StandardNormal)),
        Mixing::Identity => DMatrix::identity(cfg.d1, cfg.d2),
    };
    let width = cfg.pairs.saturating_sub(1).to_string().len().max(4);

    let mut pairs = Vec::with_capacity(cfg.pairs);
    for m in 0..cfg.pairs {
        let n = rng.random_range(cfg.min_nodes..=cfg.max_nodes);
        let mut edges1 = Vec::new();
        let mut edges2 = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                let present = rng.random::<f64>() < cfg.edge_density;
                let w = weight(&mut rng);
                if present {
                    edges1.push((i, j, w));
                }
                let flip = cfg.topology_noise > 0.0 && rng.random::<f64>() < cfg.topology_noise;
                if present != flip {
                    edges2.push((i, j, w));
                }
            }
        }
        let x1 = DMatrix::from_fn(n, cfg.d1, |_, _| rng.sample::<f64, _>(StandardNormal));
        let mut x2 = &x1 * &mixing;
        if cfg.noise > 0.0 {
            for v in x2.iter_mut() {
                *v += cfg.noise * rng.sample::<f64, _>(StandardNormal);
            }
        }
        pairs.push(SynthPair {
            id: format!("pair-{m:0width$}"),
            view1: Graph::from_edges(n, &edges1, x1)?,
            view2: Graph::from_edges(n, &edges2, x2)?,
        });
    }
    Ok(SynthDataset { mixing, pairs })
}

/// Edge rule for similarity graphs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeRule {
    /// Connect `i`, `j` when their cosine similarity exceeds `τ`.
    Threshold(f64),
    /// Connect `i` to its `m` most similar nodes (symmetrized by union).
    TopM(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingGraphConfig {
    pub rule: EdgeRule,
    /// Expected embedding width, checked when set.
    pub dim: Option<usize>,
}

/// Builds a similarity graph over embedding rows. Edge weights are cosine
/// similarities clamped to `(0, 1]`; non-positive similarities never connect.
pub fn build_embedding_graph(embeddings: &DMatrix<f64>, cfg: &EmbeddingGraphConfig) -> Result<Graph> {
    let n = embeddings.nrows();
    if n == 0 {
        return Err(GwcaError::Empty("no embedding rows".into()));
    }
    if let Some(d) = cfg.dim {
        if embeddings.ncols() != d {
            return Err(GwcaError::DimensionMismatch(format!(
                "embeddings have width {}, expected {d}",
                embeddings.ncols()
            )));
        }
    }
    if let Some(v) = embeddings.iter().find(|v| !v.is_finite()) {
        return Err(GwcaError::InvalidConfig(format!("non-finite embedding value {v}")));
    }
    if let EdgeRule::Threshold(t) = cfg.rule {
        if !(-1.0..=1.0).contains(&t) {
            return Err(GwcaError::InvalidConfig(format!("threshold must lie in [-1, 1], got {t}")));
        }
    }

    let gram = embeddings * embeddings.transpose();
    if let Some(row) = (0..n).position(|i| gram[(i, i)] == 0.0) {
        return Err(GwcaError::ZeroNormRow { row });
    }
    let norms: Vec<f64> = (0..n).map(|i| gram[(i, i)].sqrt()).collect();
    let sim = DMatrix::from_fn(n, n, |i, j| {
        let (a, b) = (i.min(j), i.max(j));
        gram[(a, b)] / (norms[a] * norms[b])
    });

    let mut adjacency = DMatrix::zeros(n, n);
    let mut connect = |i: usize, j: usize| {
        let w = sim[(i, j)].min(1.0);
        adjacency[(i, j)] = w;
        adjacency[(j, i)] = w;
    };
    match cfg.rule {
        EdgeRule::Threshold(t) => {
            for i in 0..n {
                for j in (i + 1)..n {
                    let s = sim[(i, j)];
                    if s > t && s > 0.0 {
                        connect(i, j);
                    }
                }
            }
        }
        EdgeRule::TopM(m) => {
            for i in 0..n {
                let mut others: Vec<usize> = (0..n).filter(|&j| j != i && sim[(i, j)] > 0.0).collect();
                others.sort_by(|&a, &b| sim[(i, b)].total_cmp(&sim[(i, a)]).then(a.cmp(&b)));
                for &j in others.iter().take(m) {
                    connect(i, j);
                }
            }
        }
    }
    Graph::new(adjacency, embeddings.clone())
}
