//! Closed-form estimate of the number of Eulerian circuits,
//!
//! `2^(E - (n-1)/2) pi^(-(n-1)/2) sqrt(t(G)) prod_j (d_j/2 - 1)!`,
//!
//! the leading term for complete graphs, and exact-vs-estimate ratio tables.
//! Everything is evaluated in log2 space; linear values are only emitted when
//! they fit in an `f64`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::counting::{eul_exact_with, CountError, CountOptions};
use crate::exact::{spanning_tree_count, BigCount};
use crate::graph::{gen_even_graph, Graph};
use crate::log2_big;
use crate::spectral::graph_spectrum;

/// Ratio band used by the random-graph experiment.
pub const BAND: (f64, f64) = (0.70, 1.30);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EstimateError {
    #[error("graph is not connected (no spanning trees)")]
    Disconnected,
    #[error("vertex {vertex} has odd degree {degree}")]
    OddDegree { vertex: usize, degree: usize },
    #[error("need at least 2 vertices, got {0}")]
    TooSmall(usize),
    #[error("complete-graph formula needs odd n >= 3, got {0}")]
    EvenOrder(usize),
}

impl EstimateError {
    pub fn code(&self) -> &'static str {
        match self {
            EstimateError::Disconnected => "DISCONNECTED",
            EstimateError::OddDegree { .. } => "ODD_DEGREE",
            EstimateError::TooSmall(_) => "TOO_SMALL",
            EstimateError::EvenOrder(_) => "EVEN_ORDER",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub n: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub log2_estimate: f64,
    /// `None` when `2^log2_estimate` overflows.
    pub estimate: Option<f64>,
    pub exact_log2: Option<f64>,
    pub ratio: Option<f64>,
    pub lambda1: f64,
    pub sigma_hat: f64,
    /// `min_j d_j > n/2`, the degree-based sufficient condition.
    pub min_degree_above_half: bool,
}

/// `log2(k!)`.
pub fn log2_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).log2()).sum()
}

fn finite_or_none(log2: f64) -> Option<f64> {
    let v = log2.exp2();
    v.is_finite().then_some(v)
}

fn log2_formula(g: &Graph, tree_count: &BigCount) -> f64 {
    let n = g.n() as f64;
    let half = (n - 1.0) / 2.0;
    let factorials: f64 = g.degrees().iter().map(|&d| log2_factorial(d / 2 - 1)).sum();
    (g.edge_count() as f64 - half) - half * PI.log2() + 0.5 * log2_big(tree_count) + factorials
}

pub fn estimate_eul(g: &Graph) -> Result<EstimateReport, EstimateError> {
    if g.n() < 2 {
        return Err(EstimateError::TooSmall(g.n()));
    }
    if let Some(vertex) = (0..g.n()).find(|&v| g.degree(v) % 2 == 1) {
        return Err(EstimateError::OddDegree {
            vertex,
            degree: g.degree(vertex),
        });
    }
    let t = spanning_tree_count(g);
    if t == BigCount::from(0u32) {
        return Err(EstimateError::Disconnected);
    }
    let log2_estimate = log2_formula(g, &t);
    let spectrum = graph_spectrum(g);
    Ok(EstimateReport {
        n: g.n(),
        edges: g.edge_count(),
        log2_estimate,
        estimate: finite_or_none(log2_estimate),
        exact_log2: None,
        ratio: None,
        lambda1: spectrum.lambda1,
        sigma_hat: spectrum.sigma_hat,
        min_degree_above_half: 2 * g.min_degree() > g.n(),
    })
}

impl EstimateReport {
    /// Attaches an exact count and the ratio estimate / exact.
    pub fn with_exact(mut self, exact: &BigCount) -> Self {
        let exact_log2 = log2_big(exact);
        self.exact_log2 = Some(exact_log2);
        self.ratio = Some((self.log2_estimate - exact_log2).exp2());
        self
    }
}

/// log2 of the leading term for `Eul(K_n)`, odd `n`:
/// `2^((n-1)^2/2) pi^(-(n-1)/2) n^((n-2)/2) ((n-1)/2 - 1)!^n`.
pub fn kn_asymptotic(n: usize) -> Result<f64, EstimateError> {
    if n < 3 || n.is_multiple_of(2) {
        return Err(EstimateError::EvenOrder(n));
    }
    let nf = n as f64;
    let half = (nf - 1.0) / 2.0;
    Ok((nf - 1.0).powi(2) / 2.0 - half * PI.log2()
        + (nf - 2.0) / 2.0 * nf.log2()
        + nf * log2_factorial((n - 1) / 2 - 1))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioRow {
    pub id: String,
    pub n: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub lambda1: f64,
    pub sigma_hat: f64,
    /// Decimal string; counts overflow every fixed-width type quickly.
    pub exact: Option<String>,
    pub estimate: Option<f64>,
    pub ratio: Option<f64>,
    pub status: String,
}

impl RatioRow {
    pub fn in_band(&self) -> bool {
        self.ratio.is_some_and(|r| (BAND.0..=BAND.1).contains(&r))
    }
}

pub const CSV_HEADER: [&str; 9] = [
    "id",
    "n",
    "E",
    "lambda1",
    "sigma_hat",
    "exact",
    "estimate",
    "ratio",
    "status",
];

/// One row per input graph, in input order. Failures are recorded in the
/// row's `status` rather than dropped.
pub fn ratio_table(graphs: &[(String, Graph)], opts: CountOptions) -> Vec<RatioRow> {
    graphs.iter().map(|(id, g)| ratio_row(id, g, opts)).collect()
}

pub fn ratio_row(id: &str, g: &Graph, opts: CountOptions) -> RatioRow {
    let spectrum = graph_spectrum(g);
    let mut row = RatioRow {
        id: id.to_string(),
        n: g.n(),
        edges: g.edge_count(),
        lambda1: spectrum.lambda1,
        sigma_hat: spectrum.sigma_hat,
        exact: None,
        estimate: None,
        ratio: None,
        status: "ok".into(),
    };
    let report = match estimate_eul(g) {
        Ok(r) => r,
        Err(e) => {
            row.status = e.code().to_string();
            return row;
        }
    };
    row.estimate = report.estimate;
    match eul_exact_with(g, opts) {
        Ok(count) => {
            let report = report.with_exact(&count.eul);
            row.exact = Some(count.eul.to_string());
            row.ratio = report.ratio;
        }
        Err(e) => row.status = count_status(&e),
    }
    row
}

fn count_status(e: &CountError) -> String {
    e.code().to_string()
}

pub fn table_to_csv(rows: &[RatioRow]) -> String {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
    w.write_record(CSV_HEADER).expect("write to memory");
    for row in rows {
        w.serialize(row).expect("write to memory");
    }
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("utf-8")
}

pub fn table_to_json(rows: &[RatioRow]) -> serde_json::Value {
    serde_json::to_value(rows).expect("rows serialize")
}

/// Parameters of the random even-graph ratio experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub n_min: usize,
    pub n_max: usize,
    pub p: f64,
    /// Rows to produce.
    pub count: usize,
    pub seed: u64,
    /// Candidates with `lambda1 / n` below this are redrawn.
    pub min_sigma: f64,
    #[serde(skip)]
    pub threads: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n_min: 6,
            n_max: 10,
            p: 0.8,
            count: 20,
            seed: 1,
            min_sigma: 0.5,
            threads: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub instances: usize,
    pub evaluated: usize,
    pub in_band: usize,
    pub band: [f64; 2],
    pub in_band_fraction: f64,
    /// Candidates redrawn for falling below `min_sigma`.
    pub redrawn: usize,
    pub generation_failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experiment {
    pub config: ExperimentConfig,
    pub rows: Vec<RatioRow>,
    pub summary: ExperimentSummary,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("instance count must be at least 1")]
    NoInstances,
    #[error("invalid vertex range [{0}, {1}]")]
    BadRange(usize, usize),
    #[error("probability {0} outside (0, 1]")]
    BadProbability(f64),
    #[error("only {found} of {wanted} candidates met the sigma threshold after {draws} draws")]
    TooFewCandidates { wanted: usize, found: usize, draws: usize },
}

impl ExperimentError {
    pub fn code(&self) -> &'static str {
        match self {
            ExperimentError::NoInstances => "NO_INSTANCES",
            ExperimentError::BadRange(..) => "BAD_RANGE",
            ExperimentError::BadProbability(_) => "BAD_PROBABILITY",
            ExperimentError::TooFewCandidates { .. } => "TOO_FEW_CANDIDATES",
        }
    }
}

/// Draws graphs until `count` candidates satisfy `lambda1 >= min_sigma * n`,
/// then tabulates estimate / exact for each.
///
/// Candidate `j` uses `n = n_min + U{0..=n_max-n_min}` and generator seed
/// `seed * 1_000_003 + j`, both drawn from a ChaCha stream keyed on `seed`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Experiment, ExperimentError> {
    if config.count == 0 {
        return Err(ExperimentError::NoInstances);
    }
    if config.n_min < 3 || config.n_max < config.n_min {
        return Err(ExperimentError::BadRange(config.n_min, config.n_max));
    }
    if !(config.p > 0.0 && config.p <= 1.0) {
        return Err(ExperimentError::BadProbability(config.p));
    }
    let opts = CountOptions {
        root: 0,
        threads: config.threads,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let max_draws = 50 * config.count;
    let mut rows = Vec::with_capacity(config.count);
    let (mut redrawn, mut failures, mut draws) = (0, 0, 0);
    while rows.len() < config.count && draws < max_draws {
        let j = draws;
        draws += 1;
        let n = rng.gen_range(config.n_min..=config.n_max);
        let graph_seed = config.seed.wrapping_mul(1_000_003).wrapping_add(j as u64);
        let id = format!("g{j}_n{n}_s{graph_seed}");
        let g = match gen_even_graph(n, config.p, graph_seed) {
            Ok(g) => g,
            Err(_) => {
                failures += 1;
                rows.push(RatioRow {
                    id,
                    n,
                    edges: 0,
                    lambda1: f64::NAN,
                    sigma_hat: f64::NAN,
                    exact: None,
                    estimate: None,
                    ratio: None,
                    status: "GENERATION_FAILED".into(),
                });
                continue;
            }
        };
        let sigma_hat = graph_spectrum(&g).sigma_hat;
        if sigma_hat < config.min_sigma {
            redrawn += 1;
            continue;
        }
        rows.push(ratio_row(&id, &g, opts));
    }
    if rows.len() < config.count {
        return Err(ExperimentError::TooFewCandidates {
            wanted: config.count,
            found: rows.len(),
            draws,
        });
    }
    let evaluated = rows.iter().filter(|r| r.ratio.is_some()).count();
    let in_band = rows.iter().filter(|r| r.in_band()).count();
    Ok(Experiment {
        config: config.clone(),
        summary: ExperimentSummary {
            instances: rows.len(),
            evaluated,
            in_band,
            band: [BAND.0, BAND.1],
            in_band_fraction: in_band as f64 / rows.len() as f64,
            redrawn,
            generation_failures: failures,
        },
        rows,
    })
}
