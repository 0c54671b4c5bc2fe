//! Train/evaluate helpers and the order and projection-dimension sweeps.

use std::fmt::Write as _;

use crate::error::{GwcaError, Result};
use crate::graph::Graph;
use crate::retrieval::{evaluate, recall_at_k, DistanceMode, QueryResult, RecallReport};
use crate::solver::{accumulate, solve, CorrelationModel, OrderConfig, DEFAULT_MAX_CHANNELS};

pub fn train(
    pairs: &[(Graph, Graph)],
    cfg: OrderConfig,
    reg: f64,
    channels: Option<usize>,
) -> Result<CorrelationModel> {
    solve(&accumulate(pairs, cfg)?, reg, channels)
}

/// Uses each pair's view 1 as a query against the corpus of all view-2
/// graphs; the ground truth of query `i` is corpus item `i`.
pub fn evaluate_pairs(
    model: &CorrelationModel,
    test: &[(Graph, Graph)],
    mode: DistanceMode,
    ks: &[usize],
) -> Result<(Vec<QueryResult>, RecallReport)> {
    let queries: Vec<Graph> = test.iter().map(|(q, _)| q.clone()).collect();
    let corpus: Vec<Graph> = test.iter().map(|(_, c)| c.clone()).collect();
    let truths: Vec<usize> = (0..test.len()).collect();
    let results = evaluate(model, &queries, &truths, &corpus, mode)?;
    let report = recall_at_k(&results, ks)?;
    Ok((results, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub order: usize,
    pub fusion: bool,
    pub channels: usize,
    pub rho1: f64,
    pub recall: RecallReport,
}

fn dims(pairs: &[(Graph, Graph)]) -> Result<(usize, usize)> {
    pairs.first().map(|(a, b)| (a.dim(), b.dim())).ok_or_else(|| GwcaError::Empty("no training pairs".into()))
}

/// Recall as a function of the polynomial order. `channels` is capped at what
/// each order's design width allows.
#[allow(clippy::too_many_arguments)]
pub fn sweep_orders(
    train_pairs: &[(Graph, Graph)],
    test_pairs: &[(Graph, Graph)],
    orders: &[usize],
    fusion: bool,
    channels: Option<usize>,
    reg: f64,
    mode: DistanceMode,
    ks: &[usize],
) -> Result<Vec<AblationRow>> {
    let (d1, d2) = dims(train_pairs)?;
    orders
        .iter()
        .map(|&order| {
            let cfg = OrderConfig::new(order, fusion)?;
            let cap = cfg.design_width(d1).min(cfg.design_width(d2));
            let r = channels.unwrap_or(DEFAULT_MAX_CHANNELS).min(cap);
            let model = train(train_pairs, cfg, reg, Some(r))?;
            let (_, recall) = evaluate_pairs(&model, test_pairs, mode, ks)?;
            Ok(AblationRow { order, fusion, channels: r, rho1: model.rho[0], recall })
        })
        .collect()
}

/// Recall as a function of the number of projection channels kept. The model
/// is solved once and truncated, since leading channels do not depend on how
/// many are kept.
#[allow(clippy::too_many_arguments)]
pub fn sweep_channels(
    train_pairs: &[(Graph, Graph)],
    test_pairs: &[(Graph, Graph)],
    cfg: OrderConfig,
    channels: &[usize],
    reg: f64,
    mode: DistanceMode,
    ks: &[usize],
) -> Result<Vec<AblationRow>> {
    let (d1, d2) = dims(train_pairs)?;
    let cap = cfg.design_width(d1).min(cfg.design_width(d2));
    let max_r = channels.iter().copied().max().ok_or_else(|| GwcaError::Empty("no channel counts".into()))?;
    if max_r > cap {
        return Err(GwcaError::InvalidConfig(format!("{max_r} channels requested but at most {cap} exist")));
    }
    let full = train(train_pairs, cfg, reg, Some(max_r))?;
    channels
        .iter()
        .map(|&r| {
            let model = full.truncated(r)?;
            let (_, recall) = evaluate_pairs(&model, test_pairs, mode, ks)?;
            Ok(AblationRow { order: cfg.order(), fusion: cfg.fusion(), channels: r, rho1: model.rho[0], recall })
        })
        .collect()
}

/// Plain-text table, one row per configuration.
pub fn format_table(rows: &[AblationRow]) -> String {
    let ks: Vec<usize> = rows.first().map(|r| r.recall.r_at.keys().copied().collect()).unwrap_or_default();
    let mut out = String::from("order  fusion  channels      rho1");
    for k in &ks {
        let _ = write!(out, "  {:>6}", format!("R@{k}"));
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{:>5}  {:>6}  {:>8}  {:>8.6}", r.order, r.fusion, r.channels, r.rho1);
        for k in &ks {
            let _ = write!(out, "  {:>6.3}", r.recall.at(*k).unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}

/// CSV with header `order,fusion,channels,rho1,R@k...`.
pub fn format_csv(rows: &[AblationRow]) -> String {
    let ks: Vec<usize> = rows.first().map(|r| r.recall.r_at.keys().copied().collect()).unwrap_or_default();
    let mut out = String::from("order,fusion,channels,rho1");
    for k in &ks {
        let _ = write!(out, ",R@{k}");
    }
    out.push('\n');
    for r in rows {
        let _ = write!(out, "{},{},{},{}", r.order, r.fusion, r.channels, r.rho1);
        for k in &ks {
            let _ = write!(out, ",{}", r.recall.at(*k).unwrap_or(f64::NAN));
        }
        out.push('\n');
    }
    out
}
