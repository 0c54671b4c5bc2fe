//! `gwca`: synthetic data, training, retrieval, ablations and the numerical
//! invariant suite from the command line.
//!
//! Exit codes: 0 on success, 2 for usage, configuration or input errors, 3
//! for numerical failures (singular systems, dimension mismatches) and for a
//! failing `check`.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use gwca_core::ablation::{format_csv, format_table, sweep_channels, sweep_orders};
use gwca_core::check::{run_checks, CheckConfig, Fault};
use gwca_core::io::{load_pairs, read_embeddings, write_atomic, write_dataset, write_graph, LoadedPair};
use gwca_core::solver::{DEFAULT_MAX_CHANNELS, DEFAULT_REG};
use gwca_core::synth::{build_embedding_graph, generate_pairs, EdgeRule, EmbeddingGraphConfig, Mixing, SynthConfig};
use gwca_core::{
    accumulate, evaluate, recall_at_k, solve, CorrelationModel, DistanceMode, Graph, GwcaError, ModelJson, OrderConfig,
};
use serde::Serialize;

const DEFAULTS_NOTE: &str = "Defaults (order 2 with fusion, at most 240 channels, reg 1e-6) are the optima of \
ablations on MovieGraphs; they are a starting point, not a guarantee for other data.";

#[derive(Parser)]
#[command(name = "gwca", version, about = "Graph Wasserstein correlation analysis", after_help = DEFAULTS_NOTE)]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "GWCA_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate matched graph pairs with a known linear cross-view relation.
    Synth(SynthArgs),
    /// Fit projections on the pairs listed in a manifest and write a model.
    #[command(after_help = DEFAULTS_NOTE)]
    Train(TrainArgs),
    /// Rank a corpus for every query and report Recall@K.
    Retrieve(RetrieveArgs),
    /// Run the numerical invariant suite on seeded random instances.
    Check(CheckArgs),
    /// Build a cosine-similarity graph over embedding rows.
    EmbedGraph(EmbedArgs),
    /// Recall as a function of the polynomial order and of the channel count.
    #[command(after_help = DEFAULTS_NOTE)]
    Ablate(AblateArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 100)]
    pairs: usize,
    /// Node-count range, inclusive, as MIN..MAX.
    #[arg(long, default_value = "20..40", value_parser = parse_range)]
    nodes: (usize, usize),
    #[arg(long, default_value_t = 16)]
    d1: usize,
    #[arg(long, default_value_t = 12)]
    d2: usize,
    /// Standard deviation of view-2 feature noise.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    noise: f64,
    /// Edge probability per node pair.
    #[arg(long, default_value_t = 0.2)]
    density: f64,
    /// Probability of flipping each node pair's edge state in view 2.
    #[arg(long, default_value_t = 0.0)]
    topology_noise: f64,
    /// Cross-view feature map: random or identity.
    #[arg(long, default_value = "random")]
    mixing: Mixing,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write train.jsonl/test.jsonl with the last N pairs held out.
    #[arg(long, default_value_t = 0)]
    test: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ModelArgs {
    /// Number of Laplacian powers L^0..L^{K-1}.
    #[arg(long, default_value_t = 2)]
    order: usize,
    /// Use only the highest power instead of concatenating all of them.
    #[arg(long)]
    no_fusion: bool,
    /// Relative ridge: each view gets reg * tr(C)/D on its diagonal.
    #[arg(long, default_value_t = DEFAULT_REG)]
    reg: f64,
}

impl ModelArgs {
    fn config(&self) -> anyhow::Result<OrderConfig> {
        Ok(OrderConfig::new(self.order, !self.no_fusion)?)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    manifest: PathBuf,
    #[command(flatten)]
    model: ModelArgs,
    /// Projection channels to keep (default: min(D1, D2, 240)).
    #[arg(long)]
    channels: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RetrieveArgs {
    #[arg(long)]
    model: PathBuf,
    /// Manifest whose view-1 graphs are the queries.
    #[arg(long)]
    queries: PathBuf,
    /// Manifest whose view-2 graphs form the corpus (default: the query manifest).
    #[arg(long)]
    corpus: Option<PathBuf>,
    #[arg(long, default_value = "w2")]
    mode: DistanceMode,
    /// Comma-separated recall cutoffs.
    #[arg(long, default_value = "1,5,10", value_delimiter = ',')]
    topk: Vec<usize>,
    /// JSON-lines rankings, one line per query.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Base trial count; cheap properties run a multiple of it.
    #[arg(long, default_value_t = 200)]
    trials: usize,
    /// Where to write failing instances as JSON.
    #[arg(long)]
    failure_out: Option<PathBuf>,
    #[arg(long, hide = true)]
    inject_fault: bool,
}

#[derive(Args)]
struct EmbedArgs {
    /// JSON {"embeddings": [[...], ...]} or headerless CSV, one row per node.
    #[arg(long)]
    embeddings: PathBuf,
    /// Connect nodes whose cosine similarity exceeds this value.
    #[arg(long, conflicts_with = "top_m", required_unless_present = "top_m", allow_hyphen_values = true)]
    threshold: Option<f64>,
    /// Connect each node to its M most similar nodes.
    #[arg(long)]
    top_m: Option<usize>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    #[arg(long, default_value = "1,2,3,4", value_delimiter = ',')]
    orders: Vec<usize>,
    /// Channel counts for the dimension sweep (default: powers of two up to the maximum).
    #[arg(long, value_delimiter = ',')]
    channels: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_REG)]
    reg: f64,
    #[arg(long, default_value = "w2")]
    mode: DistanceMode,
    #[arg(long, default_value = "1,5,10", value_delimiter = ',')]
    topk: Vec<usize>,
    /// Also write both sweeps as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected MIN..MAX, got {s:?}"))?;
    let a = a.trim().parse().map_err(|e| format!("{a:?}: {e}"))?;
    let b = b.trim().parse().map_err(|e| format!("{b:?}: {e}"))?;
    Ok((a, b))
}

fn require_file(path: &Path) -> anyhow::Result<()> {
    if !path.is_file() {
        bail!(GwcaError::InvalidConfig(format!("{} does not exist or is not a file", path.display())));
    }
    Ok(())
}

fn require_out_dir(path: &Path) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !dir.is_dir() {
        bail!(GwcaError::InvalidConfig(format!("output directory {} does not exist", dir.display())));
    }
    Ok(())
}

fn load_nonempty(manifest: &Path) -> anyhow::Result<Vec<LoadedPair>> {
    let pairs = load_pairs(manifest)?;
    if pairs.is_empty() {
        bail!(GwcaError::Empty(format!("manifest {} lists no pairs", manifest.display())));
    }
    Ok(pairs)
}

fn as_tuples(pairs: &[LoadedPair]) -> Vec<(Graph, Graph)> {
    pairs.iter().map(|p| (p.view1.clone(), p.view2.clone())).collect()
}

fn cmd_synth(a: SynthArgs) -> anyhow::Result<()> {
    let cfg = SynthConfig {
        pairs: a.pairs,
        min_nodes: a.nodes.0,
        max_nodes: a.nodes.1,
        d1: a.d1,
        d2: a.d2,
        mixing: a.mixing,
        noise: a.noise,
        edge_density: a.density,
        topology_noise: a.topology_noise,
        seed: a.seed,
    };
    cfg.validate()?;
    if a.test > a.pairs {
        bail!(GwcaError::InvalidConfig(format!("--test {} exceeds --pairs {}", a.test, a.pairs)));
    }
    let ds = generate_pairs(&cfg)?;
    let files = write_dataset(&a.out, &ds, a.test)?;
    println!("wrote {} graph files and {}", files.graph_files, files.manifest.display());
    if let Some((train, test)) = files.split {
        println!("split: {} ({} pairs), {} ({} pairs)", train.display(), a.pairs - a.test, test.display(), a.test);
    }
    Ok(())
}

fn rho_summary(rho: &[f64]) -> String {
    let shown: Vec<String> = rho.iter().take(8).map(|r| format!("{r:.6}")).collect();
    let mut s = format!("rho[1..{}] = {}", shown.len(), shown.join(" "));
    if rho.len() > 8 {
        let _ = write!(s, " ... (min {:.6})", rho[rho.len() - 1]);
    }
    s
}

fn cmd_train(a: TrainArgs) -> anyhow::Result<()> {
    require_file(&a.manifest)?;
    require_out_dir(&a.out)?;
    let cfg = a.model.config()?;
    let pairs = load_nonempty(&a.manifest)?;
    let cm = accumulate(&as_tuples(&pairs), cfg)?;
    let model = solve(&cm, a.model.reg, a.channels)?;
    let body = serde_json::to_string_pretty(&model.to_json())?;
    write_atomic(&a.out, body.as_bytes())?;
    println!(
        "trained on {} pairs: order {}, fusion {}, {} channels (D1 = {}, D2 = {})",
        pairs.len(),
        cfg.order(),
        cfg.fusion(),
        model.channels(),
        cm.d1,
        cm.d2
    );
    println!("{}", rho_summary(&model.rho));
    println!("rho_1 = {:.9}", model.rho[0]);
    Ok(())
}

fn read_model(path: &Path) -> anyhow::Result<CorrelationModel> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let doc: ModelJson = serde_json::from_str(&text)
        .map_err(|e| GwcaError::Parse { path: path.to_path_buf(), message: e.to_string() })?;
    Ok(CorrelationModel::from_json(&doc)?)
}

#[derive(Serialize)]
struct ResultLine<'a> {
    query: &'a str,
    ranked: Vec<(&'a str, f64)>,
    truth: &'a str,
}

fn cmd_retrieve(a: RetrieveArgs) -> anyhow::Result<()> {
    let corpus_path = a.corpus.clone().unwrap_or_else(|| a.queries.clone());
    for p in [&a.model, &a.queries, &corpus_path] {
        require_file(p)?;
    }
    if let Some(out) = &a.out {
        require_out_dir(out)?;
    }
    if a.topk.is_empty() || a.topk.contains(&0) {
        bail!(GwcaError::InvalidConfig("--topk values must be at least 1".into()));
    }
    let model = read_model(&a.model)?;
    let queries = load_nonempty(&a.queries)?;
    let corpus = load_nonempty(&corpus_path)?;

    let index: HashMap<&str, usize> = corpus.iter().enumerate().map(|(i, p)| (p.id.as_str(), i)).collect();
    let truths = queries
        .iter()
        .map(|q| {
            index
                .get(q.id.as_str())
                .copied()
                .ok_or_else(|| GwcaError::InvalidConfig(format!("query {:?} has no counterpart in the corpus", q.id)))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let qg: Vec<Graph> = queries.iter().map(|p| p.view1.clone()).collect();
    let cg: Vec<Graph> = corpus.iter().map(|p| p.view2.clone()).collect();
    let results = evaluate(&model, &qg, &truths, &cg, a.mode)?;
    let report = recall_at_k(&results, &a.topk)?;

    if let Some(out) = &a.out {
        let mut body = String::new();
        for r in &results {
            let line = ResultLine {
                query: &queries[r.query].id,
                ranked: r.ranked.iter().map(|&(i, d)| (corpus[i].id.as_str(), d)).collect(),
                truth: &corpus[r.truth].id,
            };
            body.push_str(&serde_json::to_string(&line)?);
            body.push('\n');
        }
        write_atomic(out, body.as_bytes())?;
    }
    println!("{} queries, {} corpus items, mode {:?}", queries.len(), corpus.len(), a.mode);
    for (k, v) in &report.r_at {
        println!("R@{k} {v:.4}");
    }
    Ok(())
}

fn cmd_check(a: CheckArgs) -> anyhow::Result<bool> {
    if a.trials == 0 {
        bail!(GwcaError::InvalidConfig("--trials must be at least 1".into()));
    }
    if let Some(out) = &a.failure_out {
        require_out_dir(out)?;
    }
    let fault = if a.inject_fault { Fault::FlipSigmaKernelSign } else { Fault::None };
    let start = Instant::now();
    let report = run_checks(&CheckConfig { seed: a.seed, trials: a.trials, fault });
    for p in &report.properties {
        println!(
            "{} {:<20} trials {:>6}  worst {:>9.2e}  tol {:.0e}  {:>8.3}s",
            if p.passed() { "PASS" } else { "FAIL" },
            p.name,
            p.trials,
            p.worst,
            p.tolerance,
            p.elapsed.as_secs_f64()
        );
    }
    println!("total {:.3}s, seed {}", start.elapsed().as_secs_f64(), a.seed);
    if report.passed() {
        return Ok(true);
    }
    let failures: Vec<_> = report
        .properties
        .iter()
        .filter(|p| !p.passed())
        .map(|p| serde_json::json!({ "property": p.name, "failures": p.failures, "instance": p.failing_instance }))
        .collect();
    let body = serde_json::to_string_pretty(&failures)?;
    match &a.failure_out {
        Some(out) => {
            write_atomic(out, body.as_bytes())?;
            eprintln!("failing instances written to {}", out.display());
        }
        None => eprintln!("{body}"),
    }
    Ok(false)
}

fn cmd_embed(a: EmbedArgs) -> anyhow::Result<()> {
    require_file(&a.embeddings)?;
    require_out_dir(&a.out)?;
    let rule = match (a.threshold, a.top_m) {
        (Some(t), None) => EdgeRule::Threshold(t),
        (None, Some(m)) => EdgeRule::TopM(m),
        _ => bail!(GwcaError::InvalidConfig("give exactly one of --threshold and --top-m".into())),
    };
    let emb = read_embeddings(&a.embeddings)?;
    let g = build_embedding_graph(&emb, &EmbeddingGraphConfig { rule, dim: None })?;
    write_graph(&a.out, &g)?;
    println!("{} nodes, {} edges, {} features", g.n(), g.edges().len(), g.dim());
    Ok(())
}

fn cmd_ablate(a: AblateArgs) -> anyhow::Result<()> {
    require_file(&a.train)?;
    require_file(&a.test)?;
    if let Some(out) = &a.csv {
        require_out_dir(out)?;
    }
    let train = as_tuples(&load_nonempty(&a.train)?);
    let test = as_tuples(&load_nonempty(&a.test)?);
    let by_order = sweep_orders(&train, &test, &a.orders, true, None, a.reg, a.mode, &a.topk)?;
    let cfg = OrderConfig::default();
    let channels = if a.channels.is_empty() {
        let cap = cfg.design_width(train[0].0.dim()).min(cfg.design_width(train[0].1.dim())).min(DEFAULT_MAX_CHANNELS);
        let mut c: Vec<usize> = std::iter::successors(Some(1usize), |r| Some(r * 2)).take_while(|&r| r < cap).collect();
        c.push(cap);
        c
    } else {
        a.channels.clone()
    };
    let by_dim = sweep_channels(&train, &test, cfg, &channels, a.reg, a.mode, &a.topk)?;
    println!("recall by order (fusion on):\n{}", format_table(&by_order));
    println!("recall by channel count (order {}, fusion on):\n{}", cfg.order(), format_table(&by_dim));
    if let Some(out) = &a.csv {
        let mut body = format_csv(&by_order);
        body.push_str(format_csv(&by_dim).split_once('\n').map_or("", |(_, rest)| rest));
        write_atomic(out, body.as_bytes())?;
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> anyhow::Result<()> {
    let Some(n) = threads else { return Ok(()) };
    if n == 0 {
        bail!(GwcaError::InvalidConfig("--threads must be at least 1".into()));
    }
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring the thread pool")?;
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    configure_threads(cli.threads)?;
    match cli.command {
        Command::Synth(a) => cmd_synth(a)?,
        Command::Train(a) => cmd_train(a)?,
        Command::Retrieve(a) => cmd_retrieve(a)?,
        Command::Check(a) => return cmd_check(a),
        Command::EmbedGraph(a) => cmd_embed(a)?,
        Command::Ablate(a) => cmd_ablate(a)?,
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e:#}");
            let numerical = e.downcast_ref::<GwcaError>().is_some_and(GwcaError::is_numerical);
            ExitCode::from(if numerical { 3 } else { 2 })
        }
    }
}
