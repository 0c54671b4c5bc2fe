//! Ranking a corpus against queries under a learned model, and Recall@K.
//!
//! Queries are view-1 graphs, corpus items view-2 graphs. Each graph is
//! projected once; padding a pair to a common node count only appends
//! zero rows to a projection (padded nodes are isolated and featureless), so
//! the per-pair padding is applied to the projected signals directly.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{GwcaError, Result, View};
use crate::graph::Graph;
use crate::par;
use crate::solver::CorrelationModel;
use crate::wasserstein::{w2_gaussian, SignalStats};

/// Scoring used to compare a projected query with a projected corpus item.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMode {
    /// Unweighted sum over channels of the squared Gaussian W2 distance.
    #[default]
    W2,
    /// Same sum with channel `j` weighted by `ρ_j²`.
    W2Weighted,
    /// `1 - cos` between mean-pooled projections.
    Cosine,
}

impl std::str::FromStr for DistanceMode {
    type Err = GwcaError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "w2" => Ok(DistanceMode::W2),
            "w2-weighted" => Ok(DistanceMode::W2Weighted),
            "cosine" => Ok(DistanceMode::Cosine),
            other => Err(GwcaError::InvalidConfig(format!(
                "unknown distance mode {other:?} (expected w2, w2-weighted or cosine)"
            ))),
        }
    }
}

/// A graph's projection summarized by what the distances need: per-channel
/// sums over real nodes and the node count.
#[derive(Debug, Clone, PartialEq)]
pub struct Projected {
    n: usize,
    mean: Vec<f64>,
    /// Σ_i (z_i - mean)² over the `n` real nodes.
    scatter: Vec<f64>,
}

impl Projected {
    pub fn from_signals(z: &DMatrix<f64>) -> Projected {
        let n = z.nrows();
        let nf = n as f64;
        let mut mean = Vec::with_capacity(z.ncols());
        let mut scatter = Vec::with_capacity(z.ncols());
        for col in z.column_iter() {
            let m = col.sum() / nf;
            mean.push(m);
            scatter.push(col.iter().map(|v| (v - m) * (v - m)).sum());
        }
        Projected { n, mean, scatter }
    }

    pub fn channels(&self) -> usize {
        self.mean.len()
    }

    /// Statistics of channel `j` after padding with zeros to `n_pad` nodes.
    pub fn stats_padded(&self, j: usize, n_pad: usize) -> SignalStats {
        let extra = (n_pad - self.n) as f64;
        let np = n_pad as f64;
        let m = self.mean[j];
        let mean = m * self.n as f64 / np;
        // scatter about the new mean: real nodes shift by (m - mean), pads sit at -mean
        let real = self.scatter[j] + self.n as f64 * (m - mean) * (m - mean);
        let pads = extra * mean * mean;
        SignalStats::new(mean, (real + pads) / np, n_pad)
    }
}

pub fn project(model: &CorrelationModel, g: &Graph, view: View) -> Result<Projected> {
    Ok(Projected::from_signals(&model.project(g, view)?))
}

/// Distance between two already-projected graphs.
pub fn projected_distance(model: &CorrelationModel, q: &Projected, c: &Projected, mode: DistanceMode) -> f64 {
    match mode {
        DistanceMode::Cosine => {
            let dot: f64 = q.mean.iter().zip(&c.mean).map(|(a, b)| a * b).sum();
            let nq = q.mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            let nc = c.mean.iter().map(|v| v * v).sum::<f64>().sqrt();
            if nq == 0.0 || nc == 0.0 {
                1.0
            } else {
                1.0 - dot / (nq * nc)
            }
        }
        DistanceMode::W2 | DistanceMode::W2Weighted => {
            let n = q.n.max(c.n);
            (0..q.channels())
                .map(|j| {
                    let d = w2_gaussian(&q.stats_padded(j, n), &c.stats_padded(j, n));
                    if mode == DistanceMode::W2Weighted {
                        model.rho[j] * model.rho[j] * d
                    } else {
                        d
                    }
                })
                .sum()
        }
    }
}

/// Distance from query `q` (view 1) to corpus item `c` (view 2).
pub fn pairwise_distance(model: &CorrelationModel, q: &Graph, c: &Graph, mode: DistanceMode) -> Result<f64> {
    let pq = project(model, q, View::First)?;
    let pc = project(model, c, View::Second)?;
    Ok(projected_distance(model, &pq, &pc, mode))
}

/// Sorts `(index, distance)` ascending by distance, ties by index.
pub fn sort_ranking(ranked: &mut [(usize, f64)]) {
    ranked.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
}

fn rank_projected(
    model: &CorrelationModel,
    q: &Projected,
    corpus: &[Projected],
    mode: DistanceMode,
) -> Vec<(usize, f64)> {
    let mut ranked: Vec<(usize, f64)> =
        corpus.iter().enumerate().map(|(i, c)| (i, projected_distance(model, q, c, mode))).collect();
    sort_ranking(&mut ranked);
    ranked
}

/// Full ranking of `corpus` for one query.
pub fn rank(model: &CorrelationModel, q: &Graph, corpus: &[Graph], mode: DistanceMode) -> Result<Vec<(usize, f64)>> {
    if corpus.is_empty() {
        return Err(GwcaError::Empty("corpus is empty".into()));
    }
    let pq = project(model, q, View::First)?;
    let pc = corpus.iter().map(|c| project(model, c, View::Second)).collect::<Result<Vec<_>>>()?;
    Ok(rank_projected(model, &pq, &pc, mode))
}

/// Ranking of one query with its ground-truth corpus index.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult {
    pub query: usize,
    pub ranked: Vec<(usize, f64)>,
    pub truth: usize,
}

impl QueryResult {
    /// 1-based rank of the ground truth, if present.
    pub fn truth_rank(&self) -> Option<usize> {
        self.ranked.iter().position(|&(i, _)| i == self.truth).map(|p| p + 1)
    }
}

/// Ranks every query against the shared corpus; queries run in parallel and
/// results come back in query order.
pub fn evaluate(
    model: &CorrelationModel,
    queries: &[Graph],
    truths: &[usize],
    corpus: &[Graph],
    mode: DistanceMode,
) -> Result<Vec<QueryResult>> {
    if corpus.is_empty() {
        return Err(GwcaError::Empty("corpus is empty".into()));
    }
    if queries.len() != truths.len() {
        return Err(GwcaError::DimensionMismatch(format!(
            "{} queries but {} ground-truth ids",
            queries.len(),
            truths.len()
        )));
    }
    let pc = par::map(corpus, |c| project(model, c, View::Second)).into_iter().collect::<Result<Vec<_>>>()?;
    let pq = par::map(queries, |q| project(model, q, View::First)).into_iter().collect::<Result<Vec<_>>>()?;
    Ok(par::map_range(queries.len(), |i| QueryResult {
        query: i,
        ranked: rank_projected(model, &pq[i], &pc, mode),
        truth: truths[i],
    }))
}

/// Recall@K for each requested K.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecallReport {
    pub r_at: BTreeMap<usize, f64>,
    pub query_count: usize,
}

impl RecallReport {
    pub fn at(&self, k: usize) -> Option<f64> {
        self.r_at.get(&k).copied()
    }
}

/// Fraction of queries whose ground truth lands within the top K.
pub fn recall_at_k(results: &[QueryResult], ks: &[usize]) -> Result<RecallReport> {
    if results.is_empty() {
        return Err(GwcaError::Empty("no query results".into()));
    }
    if ks.contains(&0) {
        return Err(GwcaError::InvalidConfig("recall cutoffs must be at least 1".into()));
    }
    let ranks = results
        .iter()
        .map(|r| r.truth_rank().ok_or(GwcaError::MissingTruth { query: r.query, truth: r.truth }))
        .collect::<Result<Vec<_>>>()?;
    let total = results.len() as f64;
    let r_at = ks.iter().map(|&k| (k, ranks.iter().filter(|&&r| r <= k).count() as f64 / total)).collect();
    Ok(RecallReport { r_at, query_count: results.len() })
}
