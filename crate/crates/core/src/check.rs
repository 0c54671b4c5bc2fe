//! Randomized numerical invariant suite.
//!
//! Every property draws its instances from a ChaCha8 stream keyed by
//! `(seed, property, trial)`, so any failing instance can be regenerated from
//! those three numbers alone; the report also carries the instance itself.

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::filter::{polynomial_filter, spectral_filter, FilterSpec, Spectrum};
use crate::graph::{build_laplacian, laplacian_powers, Graph};
use crate::par;
use crate::solver::{accumulate, eigen_residuals, solve, OrderConfig, DEFAULT_REG};
use crate::wasserstein::{
    build_pair_kernels, cauchy_cross_bound, signal_stats, w2_distance, w2_upper_bound, SignalStats,
};

/// Deliberate defects used to confirm the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Fault {
    #[default]
    None,
    /// Negates `K_Σ1` wherever kernels are built.
    FlipSigmaKernelSign,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CheckConfig {
    pub seed: u64,
    pub trials: usize,
    pub fault: Fault,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig { seed: 0, trials: 200, fault: Fault::None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub trials: usize,
    pub failures: usize,
    /// Largest observed error measure (property-specific; compare to `tolerance`).
    pub worst: f64,
    pub tolerance: f64,
    #[serde(serialize_with = "as_secs")]
    pub elapsed: Duration,
    pub failing_instance: Option<Value>,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub seed: u64,
    pub properties: Vec<PropertyOutcome>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.properties.iter().all(PropertyOutcome::passed)
    }
}

/// Error measure of one trial and, on failure, the instance that produced it.
struct Trial {
    error: f64,
    instance: Option<Value>,
}

type TrialFn = fn(&mut ChaCha8Rng, Fault) -> Result<(f64, Value)>;

struct Property {
    name: &'static str,
    tolerance: f64,
    /// Trials per unit of `CheckConfig::trials`.
    scale: f64,
    run: TrialFn,
}

const PROPERTIES: &[Property] = &[
    Property { name: "laplacian-spectrum", tolerance: 1e-9, scale: 0.25, run: laplacian_spectrum },
    Property { name: "filter-equivalence", tolerance: 1e-8, scale: 1.0, run: filter_equivalence },
    Property { name: "kernel-identities", tolerance: 1e-10, scale: 1.0, run: kernel_identities },
    Property { name: "cauchy-bound", tolerance: 1e-12, scale: 5.0, run: cauchy_bound },
    Property { name: "bound-dominance", tolerance: 1e-9, scale: 2.5, run: bound_dominance },
    Property { name: "metric-axioms", tolerance: 1e-10, scale: 50.0, run: metric_axioms },
    Property { name: "eigen-residuals", tolerance: 1e-6, scale: 0.1, run: eigen_equations },
];

pub fn property_names() -> Vec<&'static str> {
    PROPERTIES.iter().map(|p| p.name).collect()
}

fn trial_rng(seed: u64, property: usize, trial: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((property as u64) << 40) | trial as u64);
    rng
}

/// Runs every property. `cfg.trials` scales each property's trial count
/// (cheap properties run more instances than the solver check).
pub fn run_checks(cfg: &CheckConfig) -> CheckReport {
    let properties = PROPERTIES
        .iter()
        .enumerate()
        .map(|(pi, prop)| {
            let trials = ((cfg.trials as f64 * prop.scale).ceil() as usize).max(1);
            let start = Instant::now();
            let outcomes = par::map_range(trials, |t| {
                let mut rng = trial_rng(cfg.seed, pi, t);
                match (prop.run)(&mut rng, cfg.fault) {
                    Ok((error, instance)) => {
                        Trial { error, instance: (error.is_nan() || error > prop.tolerance).then_some(instance) }
                    }
                    Err(e) => Trial { error: f64::INFINITY, instance: Some(json!({ "error": e.to_string() })) },
                }
            });
            let elapsed = start.elapsed();
            let worst = outcomes.iter().map(|t| t.error).fold(0.0, f64::max);
            let failures = outcomes.iter().filter(|t| t.instance.is_some()).count();
            let failing_instance = outcomes.iter().enumerate().find_map(|(t, o)| {
                o.instance.as_ref().map(|inst| {
                    json!({
                        "property": prop.name,
                        "seed": cfg.seed,
                        "trial": t,
                        "error": o.error,
                        "instance": inst,
                    })
                })
            });
            PropertyOutcome {
                name: prop.name,
                trials,
                failures,
                worst,
                tolerance: prop.tolerance,
                elapsed,
                failing_instance,
            }
        })
        .collect();
    CheckReport { seed: cfg.seed, properties }
}

fn random_graph(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Graph {
    let density = rng.random_range(0.05..0.8);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < density {
                edges.push((i, j, rng.random_range(0.05..2.0)));
            }
        }
    }
    let x = DMatrix::from_fn(n, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    Graph::from_edges(n, &edges, x).expect("generated graphs are valid")
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn graph_value(g: &Graph) -> Value {
    serde_json::to_value(g.to_json()).expect("graph documents always serialize")
}

fn laplacian_spectrum(rng: &mut ChaCha8Rng, _: Fault) -> Result<(f64, Value)> {
    let n = rng.random_range(1..=64);
    let g = random_graph(rng, n, 1);
    let l = build_laplacian(&g, true);
    let eig = SymmetricEigen::new(l.matrix().clone());
    let below = eig.eigenvalues.iter().map(|&v| (-v).max(0.0)).fold(0.0, f64::max);
    let above = eig.eigenvalues.iter().map(|&v| (v - 2.0).max(0.0)).fold(0.0, f64::max);
    let asym = (l.matrix() - l.matrix().transpose()).amax();
    Ok((below.max(above).max(asym), json!({ "graph": graph_value(&g) })))
}

fn filter_equivalence(rng: &mut ChaCha8Rng, _: Fault) -> Result<(f64, Value)> {
    let n = rng.random_range(2..=50);
    let d = rng.random_range(1..=4);
    let order = rng.random_range(1..=5);
    let g = random_graph(rng, n, d);
    let theta = DMatrix::from_fn(order, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let f = FilterSpec::new(theta.clone())?;
    let l = build_laplacian(&g, true);
    let poly = polynomial_filter(&laplacian_powers(&l, order - 1), &f, g.features())?;
    let spec = Spectrum::of(&l);
    let mut exact = DVector::zeros(n);
    for c in 0..d {
        let coeffs: Vec<f64> = theta.column(c).iter().copied().collect();
        exact += spectral_filter(&spec, &coeffs, &g.features().column(c).into_owned())?;
    }
    let err = (&poly - &exact).norm() / exact.norm().max(f64::MIN_POSITIVE);
    Ok((
        err,
        json!({ "graph": graph_value(&g), "theta": theta.row_iter().map(|r| r.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>() }),
    ))
}

struct PairInstance {
    g1: Graph,
    g2: Graph,
    k: usize,
    w1: DVector<f64>,
    w2: DVector<f64>,
}

impl PairInstance {
    fn draw(rng: &mut ChaCha8Rng) -> Self {
        let n = rng.random_range(2..=30);
        let d1 = rng.random_range(1..=5);
        let d2 = rng.random_range(1..=5);
        let k = rng.random_range(0..=4);
        let g1 = random_graph(rng, n, d1);
        let g2 = random_graph(rng, n, d2);
        let w1 = random_vec(rng, d1);
        let w2 = random_vec(rng, d2);
        PairInstance { g1, g2, k, w1, w2 }
    }

    fn value(&self) -> Value {
        json!({
            "g1": graph_value(&self.g1),
            "g2": graph_value(&self.g2),
            "k": self.k,
            "w1": self.w1.as_slice(),
            "w2": self.w2.as_slice(),
        })
    }
}

fn kernels_for(
    inst: &PairInstance,
    fault: Fault,
) -> Result<(crate::wasserstein::PairKernels, DMatrix<f64>, DMatrix<f64>)> {
    let p1 = laplacian_powers(&build_laplacian(&inst.g1, true), inst.k);
    let p2 = laplacian_powers(&build_laplacian(&inst.g2, true), inst.k);
    let mut kern = build_pair_kernels(&p1, &p2, inst.k, inst.g1.n(), inst.g2.n())?;
    if fault == Fault::FlipSigmaKernelSign {
        kern.k_sigma1.neg_mut();
    }
    Ok((kern, p1[inst.k].clone(), p2[inst.k].clone()))
}

fn quad(x: &DMatrix<f64>, w: &DVector<f64>, k: &DMatrix<f64>, y: &DMatrix<f64>, v: &DVector<f64>) -> f64 {
    (x * w).dot(&(k * (y * v)))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1.0)
}

fn kernel_identities(rng: &mut ChaCha8Rng, fault: Fault) -> Result<(f64, Value)> {
    let inst = PairInstance::draw(rng);
    let (kern, l1k, l2k) = kernels_for(&inst, fault)?;
    let (x1, x2) = (inst.g1.features(), inst.g2.features());
    let z1 = &l1k * (x1 * &inst.w1);
    let z2 = &l2k * (x2 * &inst.w2);
    let s1 = signal_stats(z1.as_slice())?;
    let s2 = signal_stats(z2.as_slice())?;
    let err = [
        rel(quad(x1, &inst.w1, &kern.k_mu1, x1, &inst.w1), s1.mean * s1.mean),
        rel(quad(x2, &inst.w2, &kern.k_mu2, x2, &inst.w2), s2.mean * s2.mean),
        rel(quad(x1, &inst.w1, &kern.k_mu12, x2, &inst.w2), s1.mean * s2.mean),
        rel(quad(x1, &inst.w1, &kern.k_sigma1, x1, &inst.w1), s1.variance),
        rel(quad(x2, &inst.w2, &kern.k_sigma2, x2, &inst.w2), s2.variance),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    Ok((err, inst.value()))
}

fn cauchy_bound(rng: &mut ChaCha8Rng, _: Fault) -> Result<(f64, Value)> {
    let n = rng.random_range(1..=40);
    let center = |v: DVector<f64>| {
        let m = v.mean();
        v.add_scalar(-m)
    };
    let a = center(random_vec(rng, n));
    let b = if rng.random::<f64>() < 0.1 { &a * rng.random_range(0.1..10.0) } else { center(random_vec(rng, n)) };
    let (lhs, rhs) = cauchy_cross_bound(a.as_slice(), b.as_slice())?;
    Ok(((rhs - lhs).max(0.0), json!({ "x1c": a.as_slice(), "x2c": b.as_slice() })))
}

fn bound_dominance(rng: &mut ChaCha8Rng, fault: Fault) -> Result<(f64, Value)> {
    let inst = PairInstance::draw(rng);
    let (kern, l1k, l2k) = kernels_for(&inst, fault)?;
    let (x1, x2) = (inst.g1.features(), inst.g2.features());
    let bound = w2_upper_bound(&kern, x1, x2, &inst.w1, &inst.w2)?;
    let exact = crate::wasserstein::filtered_w2(&l1k, x1, &inst.w1, &l2k, x2, &inst.w2)?;
    Ok(((exact - bound).max(0.0) / exact.max(1.0), inst.value()))
}

fn metric_axioms(rng: &mut ChaCha8Rng, _: Fault) -> Result<(f64, Value)> {
    let mut draw = || SignalStats::new(rng.random_range(-5.0..5.0), rng.random_range(0.0f64..4.0).powi(2), 1);
    let (a, b, c) = (draw(), draw(), draw());
    let (ab, ba, bc, ac) = (w2_distance(&a, &b), w2_distance(&b, &a), w2_distance(&b, &c), w2_distance(&a, &c));
    let violation =
        [(ab - ba).abs(), w2_distance(&a, &a), (ac - ab - bc).max(0.0), (-ab).max(0.0)].into_iter().fold(0.0, f64::max);
    let stats = |s: &SignalStats| json!([s.mean, s.variance]);
    Ok((violation, json!({ "a": stats(&a), "b": stats(&b), "c": stats(&c) })))
}

fn eigen_equations(rng: &mut ChaCha8Rng, _: Fault) -> Result<(f64, Value)> {
    let d1 = rng.random_range(1..=4);
    let d2 = rng.random_range(1..=4);
    let order = rng.random_range(1..=3);
    let fusion = rng.random::<bool>();
    let cfg = OrderConfig::new(order, fusion)?;
    let m = rng.random_range(10..=30);
    let pairs: Vec<(Graph, Graph)> = (0..m)
        .map(|_| {
            let n = rng.random_range(3..=12);
            (random_graph(rng, n, d1), random_graph(rng, n, d2))
        })
        .collect();
    let cm = accumulate(&pairs, cfg)?;
    let model = solve(&cm, DEFAULT_REG, None)?;
    let mut worst: f64 = 0.0;
    for (r1, r2) in eigen_residuals(&cm, &model)? {
        worst = worst.max(r1).max(r2);
    }
    // correlations must stay within [0, 1]; report an overshoot as a residual
    let overshoot = model.rho.iter().map(|&r| (r - 1.0 - 1e-8).max(0.0) + (-r).max(0.0)).fold(0.0, f64::max);
    let overshoot = if overshoot > 0.0 { f64::INFINITY } else { 0.0 };
    Ok((worst.max(overshoot), json!({ "pairs": m, "d1": d1, "d2": d2, "order": order, "fusion": fusion })))
}
