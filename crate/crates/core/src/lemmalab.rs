//! Finite-n checks of the Laplacian inequalities used in the circuit-count
//! asymptotics.
//!
//! Each check yields a [`LemmaVerdict`]. Inequalities with explicit constants
//! are asserted; inequalities that only claim some constant exists are
//! measured and the constant is recorded in `params`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{det_exact, det_q_hat, laplacian, q_hat, spanning_tree_count};
use crate::graph::{
    delete_tree_edges, delete_vertices, for_each_spanning_tree, gen_even_graph, random_spanning_tree, Graph, GraphError,
};
use crate::spectral::{
    algebraic_connectivity, congruence_by_inverse_sqrt, det_f64, det_lower_bound_check, eigen_tolerance,
    graph_spectrum, laplacian_f64, log_det_expansion, norms, q_hat_f64, spectral_norm, SpectralError,
};
use crate::{estimator::log2_factorial, log2_big};

pub const RELATIVE_SLACK: f64 = 1e-9;
pub const MAX_TAIL_VERTICES: usize = 8;
pub const TREE_DRAWS: usize = 50;
pub const DELETION_SUBSETS: usize = 5;

pub mod ids {
    pub const FIEDLER_UPPER: &str = "fiedler_upper";
    pub const FIEDLER_LOWER: &str = "fiedler_lower";
    pub const FIEDLER_DELETION: &str = "fiedler_deletion";
    pub const QHAT_INVERSE_NORM: &str = "qhat_inverse_norm";
    pub const LOG_DET_REMAINDER: &str = "log_det_remainder";
    pub const DET_LOWER_BOUND: &str = "det_lower_bound";
    pub const PRINCIPAL_MINOR: &str = "principal_minor";
    pub const VERTEX_DELETION: &str = "vertex_deletion";
    pub const TREE_DEGREE_TAIL: &str = "tree_degree_tail";
    pub const TREE_REMOVAL_CONNECTIVITY: &str = "tree_removal_connectivity";
    pub const TREE_REMOVAL_DET: &str = "tree_removal_det";
    pub const LEVEL_FUNCTION: &str = "level_function";
    pub const SPECTRAL_RADIUS: &str = "spectral_radius";
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LemmaError {
    #[error("graph has {0} vertices, enumeration limited to {MAX_TAIL_VERTICES}")]
    TooLarge(usize),
    #[error("lambda_1 = {lambda1} below sigma * n = {required}")]
    OutOfHypothesis { lambda1: f64, required: f64 },
    #[error("seed set has {size} vertices, need at least {required}")]
    SeedSetTooSmall { size: usize, required: f64 },
    #[error("vertex {0} out of range")]
    VertexOutOfRange(usize),
    #[error("level construction stalled at level {level}; {} vertices unreachable", stuck.len())]
    Stalled { level: usize, stuck: Vec<usize> },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

impl LemmaError {
    pub fn code(&self) -> &'static str {
        match self {
            LemmaError::TooLarge(_) => "SIZE_GUARD",
            LemmaError::OutOfHypothesis { .. } => "OUT_OF_HYPOTHESIS",
            LemmaError::SeedSetTooSmall { .. } => "SEED_SET_TOO_SMALL",
            LemmaError::VertexOutOfRange(_) => "VERTEX_OUT_OF_RANGE",
            LemmaError::Stalled { .. } => "LEVEL_STALLED",
            LemmaError::InvalidParameter(_) => "INVALID_PARAMETER",
            LemmaError::Graph(_) => "INVALID_GRAPH",
            LemmaError::Spectral(_) => "SPECTRAL",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    /// Inequality with an explicit constant; `holds == false` is a violation.
    Asserted,
    /// Existential constant, recorded in `params`.
    Measured,
    OutOfHypothesis,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaVerdict {
    pub lemma: String,
    pub graph_id: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub slack: f64,
    pub status: VerdictStatus,
    pub params: BTreeMap<String, f64>,
}

impl LemmaVerdict {
    /// Verdict for `lhs <= rhs` up to [`RELATIVE_SLACK`].
    pub fn inequality(lemma: &str, graph_id: &str, lhs: f64, rhs: f64) -> Self {
        LemmaVerdict {
            lemma: lemma.to_string(),
            graph_id: graph_id.to_string(),
            lhs,
            rhs,
            holds: leq_relative(lhs, rhs),
            slack: rhs - lhs,
            status: VerdictStatus::Asserted,
            params: BTreeMap::new(),
        }
    }

    fn measured(lemma: &str, graph_id: &str, lhs: f64, rhs: f64) -> Self {
        LemmaVerdict {
            holds: lhs.is_finite() && rhs.is_finite(),
            status: VerdictStatus::Measured,
            ..LemmaVerdict::inequality(lemma, graph_id, lhs, rhs)
        }
    }

    fn skipped(lemma: &str, graph_id: &str) -> Self {
        LemmaVerdict {
            lemma: lemma.to_string(),
            graph_id: graph_id.to_string(),
            lhs: f64::NAN,
            rhs: f64::NAN,
            holds: false,
            slack: f64::NAN,
            status: VerdictStatus::Skipped,
            params: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.params.insert(key.to_string(), value);
        self
    }

    fn hypothesis(mut self, ok: bool) -> Self {
        if !ok && self.status != VerdictStatus::Skipped {
            self.status = VerdictStatus::OutOfHypothesis;
        }
        self
    }

    pub fn is_violation(&self) -> bool {
        self.status == VerdictStatus::Asserted && !self.holds
    }
}

fn leq_relative(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + RELATIVE_SLACK * lhs.abs().max(rhs.abs()).max(1.0)
}

fn log2_det(d: &BigInt) -> f64 {
    if d.sign() == num_bigint::Sign::Plus {
        log2_big(d.magnitude())
    } else {
        f64::NEG_INFINITY
    }
}

fn in_hypothesis(lambda1: f64, sigma: f64, n: usize) -> bool {
    lambda1 >= sigma * n as f64 - eigen_tolerance(n)
}

/// Upper and lower degree bounds on the algebraic connectivity, and its drop
/// under vertex deletion (worst case over [`DELETION_SUBSETS`] random subsets).
pub fn verify_fiedler_bounds(g: &Graph, graph_id: &str, seed: u64) -> Vec<LemmaVerdict> {
    let n = g.n();
    let nf = n as f64;
    let lambda1 = algebraic_connectivity(g);
    let dmin = g.min_degree() as f64;
    let tol = eigen_tolerance(n);
    let upper = LemmaVerdict::inequality(ids::FIEDLER_UPPER, graph_id, lambda1 - tol, nf / (nf - 1.0) * dmin)
        .with("lambda1", lambda1)
        .with("min_degree", dmin);
    let lower = LemmaVerdict::inequality(ids::FIEDLER_LOWER, graph_id, 2.0 * dmin - nf + 2.0, lambda1 + tol)
        .with("lambda1", lambda1)
        .with("min_degree", dmin);

    let deletion = if n < 3 {
        LemmaVerdict::skipped(ids::FIEDLER_DELETION, graph_id)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut vertices: Vec<usize> = (0..n).collect();
        let mut worst: Option<LemmaVerdict> = None;
        for _ in 0..DELETION_SUBSETS {
            let r = rng.gen_range(1..=n - 2);
            vertices.shuffle(&mut rng);
            let reduced = delete_vertices(g, &vertices[..r]).expect("at least two vertices remain");
            let lambda_r = algebraic_connectivity(&reduced);
            let v = LemmaVerdict::inequality(ids::FIEDLER_DELETION, graph_id, lambda1 - r as f64 - tol, lambda_r)
                .with("r", r as f64)
                .with("lambda1", lambda1)
                .with("lambda1_reduced", lambda_r);
            if worst.as_ref().is_none_or(|w| v.slack < w.slack) {
                worst = Some(v);
            }
        }
        worst.expect("at least one subset")
    };
    vec![upper, lower, deletion]
}

/// Largest Laplacian eigenvalue against the bound `n`.
pub fn verify_spectral_radius(g: &Graph, graph_id: &str) -> LemmaVerdict {
    let n = g.n();
    let s = graph_spectrum(g);
    LemmaVerdict::inequality(
        ids::SPECTRAL_RADIUS,
        graph_id,
        s.lambda_max,
        n as f64 + eigen_tolerance(n),
    )
}

/// Records `c_inf = n ||Q_hat^{-1}||_inf`; holds when the 1- and inf-norms
/// agree and are finite.
pub fn verify_qhat_inverse_norm(g: &Graph, graph_id: &str, sigma: f64) -> LemmaVerdict {
    let n = g.n();
    let lambda1 = algebraic_connectivity(g);
    let qh = q_hat_f64(g);
    let Some(inv) = qh.clone().cholesky().map(|c| c.inverse()) else {
        return LemmaVerdict::skipped(ids::QHAT_INVERSE_NORM, graph_id)
            .with("lambda1", lambda1)
            .hypothesis(false);
    };
    let r = norms(&inv);
    let agree = (r.norm1 - r.norm_inf).abs() <= 1e-12 * r.norm_inf.max(1e-300);
    let diag_min = (0..n).map(|i| inv[(i, i)]).fold(f64::INFINITY, f64::min);
    let diag_max = (0..n).map(|i| inv[(i, i)]).fold(f64::NEG_INFINITY, f64::max);
    let mut v = LemmaVerdict::inequality(ids::QHAT_INVERSE_NORM, graph_id, r.norm1, r.norm_inf)
        .with("c_inf", n as f64 * r.norm_inf)
        .with("sigma", sigma)
        .with("lambda1", lambda1)
        .with("n_diag_min", n as f64 * diag_min)
        .with("n_diag_max", n as f64 * diag_max);
    v.holds = agree && r.norm_inf.is_finite();
    v.slack = r.norm_inf - r.norm1;
    v.hypothesis(in_hypothesis(lambda1, sigma, n))
}

/// Remainder of the truncated trace series for `log det(I + X)`.
pub fn verify_log_det_remainder(x: &DMatrix<f64>, order: usize, id: &str) -> Result<LemmaVerdict, LemmaError> {
    let e = log_det_expansion(x, order)?;
    let n = x.nrows();
    let det = det_f64(&(DMatrix::<f64>::identity(n, n) + x));
    let remainder = (det.ln() - e.approx.ln()).abs();
    Ok(LemmaVerdict::inequality(ids::LOG_DET_REMAINDER, id, remainder, e.bound)
        .with("m", order as f64)
        .with("norm2", e.norm2)
        .with("n", n as f64))
}

/// `exp(-tr X / (1 - ||X||)) <= det(I - X)` for symmetric PSD contractions.
pub fn verify_det_lower_bound(x: &DMatrix<f64>, id: &str) -> Result<LemmaVerdict, LemmaError> {
    let (det, bound) = det_lower_bound_check(x)?;
    Ok(LemmaVerdict::inequality(ids::DET_LOWER_BOUND, id, bound, det)
        .with("norm2", spectral_norm(x))
        .with("trace", x.trace()))
}

fn random_contraction(rng: &mut ChaCha8Rng) -> (DMatrix<f64>, DMatrix<f64>, usize) {
    let n = rng.gen_range(2..=8);
    let target = rng.gen_range(0.05..0.95);
    let order = rng.gen_range(2..=6);
    let raw = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    let general = &raw * (target / spectral_norm(&raw).max(1e-300));
    let gram = &raw * raw.transpose();
    let gram = (&gram + gram.transpose()) * 0.5;
    let psd = &gram * (target / spectral_norm(&gram).max(1e-300));
    (general, psd, order)
}

/// Trace-series remainder and determinant lower bound on `count` random
/// contractions (general and symmetric PSD), one ChaCha stream each.
pub fn verify_contractions(count: usize, seed: u64) -> Vec<LemmaVerdict> {
    let base = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            let (general, psd, order) = random_contraction(&mut rng);
            let id = format!("contraction-{i}");
            [
                verify_log_det_remainder(&general, order, &id),
                verify_det_lower_bound(&psd, &id),
            ]
            .into_iter()
            .map(|r| r.expect("scaled below unit norm"))
        })
        .collect()
}

/// Principal minor and vertex-deletion determinant ratios, plus the
/// tree-removal checks for a random spanning tree of small maximum degree.
pub fn verify_minor_and_deletion(g: &Graph, graph_id: &str, sigma: f64, seed: u64) -> Vec<LemmaVerdict> {
    let n = g.n();
    let nf = n as f64;
    let lambda1 = algebraic_connectivity(g);
    let hyp = in_hypothesis(lambda1, sigma, n);
    let log_det = log2_det(&det_q_hat(g));
    let mut out = Vec::new();

    let minor = det_exact(&q_hat(&laplacian(g)).minor(0, 0));
    let lhs = nf.log2() + log2_det(&minor);
    out.push(
        LemmaVerdict::measured(ids::PRINCIPAL_MINOR, graph_id, lhs, log_det)
            .with("c1", (lhs - log_det).exp2())
            .with("sigma", sigma)
            .hypothesis(hyp),
    );

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut vertices: Vec<usize> = (0..n).collect();
    vertices.shuffle(&mut rng);
    for r in 1..=2.min(n.saturating_sub(2)) {
        let reduced = delete_vertices(g, &vertices[..r]).expect("at least two vertices remain");
        let reduced_log = log2_det(&det_q_hat(&reduced));
        let lhs = log_det - r as f64 * nf.log2();
        let c2 = ((log_det - reduced_log) / r as f64).exp2() / nf;
        out.push(
            LemmaVerdict::measured(ids::VERTEX_DELETION, graph_id, lhs, reduced_log)
                .with("c2", c2)
                .with("r", r as f64)
                .with("sigma", sigma)
                .hypothesis(hyp),
        );
    }

    let limit = sigma * nf / 4.0;
    let tree = (0..TREE_DRAWS)
        .filter_map(|_| random_spanning_tree(g, &mut rng))
        .find(|t| tree_max_degree(n, t) as f64 <= limit);
    match tree {
        Some(t) => out.extend(verify_tree_removal(g, graph_id, &t, sigma).expect("tree drawn from g")),
        None => {
            out.push(LemmaVerdict::skipped(ids::TREE_REMOVAL_CONNECTIVITY, graph_id).with("sigma", sigma));
            out.push(LemmaVerdict::skipped(ids::TREE_REMOVAL_DET, graph_id).with("sigma", sigma));
        }
    }
    out
}

fn tree_max_degree(n: usize, tree: &[(usize, usize)]) -> usize {
    let mut deg = vec![0usize; n];
    for &(u, v) in tree {
        deg[u] += 1;
        deg[v] += 1;
    }
    deg.into_iter().max().unwrap_or(0)
}

/// Removing the edges of spanning tree `T` keeps `lambda_1 >= sigma n / 2`
/// when `T` has maximum degree at most `sigma n / 4`, and shrinks
/// `det Q_hat` by a bounded factor `c4`.
pub fn verify_tree_removal(
    g: &Graph,
    graph_id: &str,
    tree: &[(usize, usize)],
    sigma: f64,
) -> Result<Vec<LemmaVerdict>, LemmaError> {
    let n = g.n();
    let nf = n as f64;
    let lambda1 = algebraic_connectivity(g);
    let max_deg = tree_max_degree(n, tree) as f64;
    let hyp = in_hypothesis(lambda1, sigma, n) && max_deg <= sigma * nf / 4.0;
    let rest = delete_tree_edges(g, tree)?;
    let lambda_t = algebraic_connectivity(&rest);
    let connectivity = LemmaVerdict::inequality(
        ids::TREE_REMOVAL_CONNECTIVITY,
        graph_id,
        sigma * nf / 2.0,
        lambda_t + eigen_tolerance(n),
    )
    .with("lambda1", lambda1)
    .with("lambda1_without_tree", lambda_t)
    .with("tree_max_degree", max_deg)
    .with("sigma", sigma)
    .hypothesis(hyp);

    let log_det = log2_det(&det_q_hat(g));
    let rest_log = log2_det(&det_q_hat(&rest));
    let det = LemmaVerdict::measured(ids::TREE_REMOVAL_DET, graph_id, log_det, rest_log)
        .with("c4", (rest_log - log_det).exp2())
        .with("tree_max_degree", max_deg)
        .with("sigma", sigma)
        .hypothesis(hyp);
    Ok(vec![connectivity, det])
}

/// Determinant lower bound applied to `X = Q_hat^{-1/2} Q(T) Q_hat^{-1/2}`,
/// which shares its spectrum with `Q(T) Q_hat^{-1}`, for a random spanning
/// tree `T`. Skipped when `||X||_2 >= 1`.
pub fn verify_tree_det_bound(g: &Graph, graph_id: &str, seed: u64) -> LemmaVerdict {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let Some(tree) = random_spanning_tree(g, &mut rng) else {
        return LemmaVerdict::skipped(ids::DET_LOWER_BOUND, graph_id);
    };
    let t = Graph::new(g.n(), tree.iter().copied()).expect("subgraph of a valid graph");
    let x = congruence_by_inverse_sqrt(&laplacian_f64(&t), &q_hat_f64(g));
    match verify_det_lower_bound(&x, graph_id) {
        Ok(v) => v.with("trace_tree_laplacian", 2.0 * (g.n() as f64 - 1.0)),
        Err(_) => LemmaVerdict::skipped(ids::DET_LOWER_BOUND, graph_id).with("norm2", spectral_norm(&x)),
    }
}

/// Counts spanning trees with maximum degree above `d` and records
/// `c3 = (count * d! / det Q_hat)^(1/n)`. Asserts `count <= t(G)`, and
/// `count == 0` when `d >= n - 1`.
pub fn verify_tree_degree_tail(g: &Graph, graph_id: &str, d: usize) -> Result<LemmaVerdict, LemmaError> {
    let n = g.n();
    if n > MAX_TAIL_VERTICES {
        return Err(LemmaError::TooLarge(n));
    }
    let mut count = 0u64;
    for_each_spanning_tree(g, |t| {
        if tree_max_degree(n, t) > d {
            count += 1;
        }
    });
    let total = spanning_tree_count(g);
    let total_f = log2_big(&total).exp2();
    let log_det = log2_det(&det_q_hat(g));
    let c3 = if count == 0 {
        0.0
    } else {
        (((count as f64).log2() + log2_factorial(d) - log_det) / n as f64).exp2()
    };
    let mut v = LemmaVerdict::inequality(ids::TREE_DEGREE_TAIL, graph_id, count as f64, total_f)
        .with("d", d as f64)
        .with("c3", c3)
        .with("count", count as f64);
    if d + 1 >= n && count != 0 {
        v.holds = false;
    }
    Ok(v)
}

/// Vertex levels with every vertex outside the seed set `a_set` having at
/// least `ceil(alpha n)` neighbours on strictly lower levels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunction {
    pub h: Vec<usize>,
    #[serde(rename = "H")]
    pub max_level: usize,
    pub alpha: f64,
    #[serde(rename = "A")]
    pub seed_set: Vec<usize>,
}

impl LevelFunction {
    pub fn threshold(&self) -> usize {
        threshold(self.alpha, self.h.len())
    }

    /// Checks the three defining properties against `g`.
    pub fn check(&self, g: &Graph) -> bool {
        let need = self.threshold();
        let mut in_seed = vec![false; g.n()];
        for &v in &self.seed_set {
            in_seed[v] = true;
        }
        self.h.len() == g.n()
            && self.seed_set.iter().all(|&v| self.h[v] == 0)
            && self.h.iter().all(|&l| l <= self.max_level)
            && (0..g.n())
                .filter(|&v| !in_seed[v])
                .all(|v| g.neighbors(v).iter().filter(|&&w| self.h[w] < self.h[v]).count() >= need)
    }
}

fn threshold(alpha: f64, n: usize) -> usize {
    ((alpha * n as f64) - 1e-12).ceil().max(1.0) as usize
}

/// Greedy layering from the seed set. When the seed set leaves fewer than
/// `sigma n / 4` vertices outside, all of them go to level 1 with
/// `alpha = sigma / 4`; otherwise `alpha = a sigma^3 / 32` and each level
/// takes every remaining vertex with enough neighbours already placed.
pub fn build_level_function(g: &Graph, a_set: &[usize], a: f64, sigma: f64) -> Result<LevelFunction, LemmaError> {
    let n = g.n();
    let nf = n as f64;
    if !(a > 0.0 && sigma > 0.0) {
        return Err(LemmaError::InvalidParameter(format!("a = {a}, sigma = {sigma}")));
    }
    let mut seed_set = a_set.to_vec();
    seed_set.sort_unstable();
    seed_set.dedup();
    if let Some(&v) = seed_set.iter().find(|&&v| v >= n) {
        return Err(LemmaError::VertexOutOfRange(v));
    }
    if (seed_set.len() as f64) < a * nf - 1e-12 {
        return Err(LemmaError::SeedSetTooSmall {
            size: seed_set.len(),
            required: a * nf,
        });
    }
    let lambda1 = algebraic_connectivity(g);
    if !in_hypothesis(lambda1, sigma, n) {
        return Err(LemmaError::OutOfHypothesis {
            lambda1,
            required: sigma * nf,
        });
    }

    let mut h = vec![usize::MAX; n];
    for &v in &seed_set {
        h[v] = 0;
    }
    let large = seed_set.len() as f64 > nf - sigma * nf / 4.0;
    let alpha = if large { sigma / 4.0 } else { a * sigma.powi(3) / 32.0 };
    let need = threshold(alpha, n);

    let mut level = 0;
    let mut remaining: Vec<usize> = (0..n).filter(|&v| h[v] == usize::MAX).collect();
    while !remaining.is_empty() {
        level += 1;
        let (next, rest): (Vec<usize>, Vec<usize>) = remaining
            .iter()
            .partition(|&&v| large || g.neighbors(v).iter().filter(|&&w| h[w] < level).count() >= need);
        if next.is_empty() {
            return Err(LemmaError::Stalled { level, stuck: rest });
        }
        for v in next {
            h[v] = level;
        }
        remaining = rest;
    }
    let f = LevelFunction {
        h,
        max_level: level,
        alpha,
        seed_set,
    };
    if !f.check(g) {
        let stuck = (0..n)
            .filter(|&v| f.h[v] > 0 && g.neighbors(v).iter().filter(|&&w| f.h[w] < f.h[v]).count() < need)
            .collect();
        return Err(LemmaError::Stalled { level, stuck });
    }
    Ok(f)
}

/// Level-function verdict for a random seed set of size `ceil(a n)`.
pub fn verify_level_function(g: &Graph, graph_id: &str, a: f64, sigma: f64, seed: u64) -> LemmaVerdict {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = ((a * n as f64).ceil() as usize).clamp(1, n);
    let seed_set: Vec<usize> = rand::seq::index::sample(&mut rng, n, size).into_vec();
    match build_level_function(g, &seed_set, a, sigma) {
        Ok(f) => {
            let need = f.threshold() as f64;
            let min_lower = (0..n)
                .filter(|&v| f.h[v] > 0)
                .map(|v| g.neighbors(v).iter().filter(|&&w| f.h[w] < f.h[v]).count())
                .min()
                .map_or(f64::INFINITY, |c| c as f64);
            let mut v = LemmaVerdict::inequality(ids::LEVEL_FUNCTION, graph_id, need, min_lower)
                .with("alpha", f.alpha)
                .with("H", f.max_level as f64)
                .with("a", a)
                .with("sigma", sigma);
            v.holds = v.holds && f.check(g);
            v
        }
        Err(LemmaError::OutOfHypothesis { lambda1, .. }) => LemmaVerdict::skipped(ids::LEVEL_FUNCTION, graph_id)
            .with("lambda1", lambda1)
            .with("sigma", sigma)
            .hypothesis(false),
        Err(e) => {
            let mut v = LemmaVerdict::inequality(ids::LEVEL_FUNCTION, graph_id, 1.0, 0.0)
                .with("a", a)
                .with("sigma", sigma);
            if let LemmaError::Stalled { stuck, .. } = e {
                v = v.with("stuck", stuck.len() as f64);
            }
            v.holds = false;
            v
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    pub seed: u64,
    pub n: usize,
    pub p: f64,
    #[serde(skip)]
    pub graph: Option<Graph>,
}

pub const CORPUS_DENSITIES: [f64; 3] = [0.5, 0.7, 0.9];

/// Fixed-seed corpus: seed `s` picks `n` in `[n_min, n_max]` and `p` from
/// [`CORPUS_DENSITIES`], then generates the graph with the same seed.
pub fn corpus(seeds: std::ops::RangeInclusive<u64>, n_min: usize, n_max: usize) -> Vec<CorpusEntry> {
    seeds
        .map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(n_min..=n_max);
            let p = CORPUS_DENSITIES[rng.gen_range(0..CORPUS_DENSITIES.len())];
            CorpusEntry {
                id: format!("corpus-{seed}"),
                seed,
                n,
                p,
                graph: gen_even_graph(n, p, seed).ok(),
            }
        })
        .collect()
}

pub fn default_corpus() -> Vec<CorpusEntry> {
    corpus(1..=100, 6, 30)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub sigma: f64,
    pub a: f64,
    pub contractions: usize,
    pub seed: u64,
    pub threads: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            sigma: 0.5,
            a: 0.3,
            contractions: 1000,
            seed: 1,
            threads: 1,
        }
    }
}

/// All per-graph verdicts for one corpus graph.
pub fn verify_graph(g: &Graph, graph_id: &str, config: &SuiteConfig, seed: u64) -> Vec<LemmaVerdict> {
    let mut out = verify_fiedler_bounds(g, graph_id, seed);
    out.push(verify_spectral_radius(g, graph_id));
    out.push(verify_qhat_inverse_norm(g, graph_id, config.sigma));
    out.extend(verify_minor_and_deletion(g, graph_id, config.sigma, seed));
    out.push(verify_tree_det_bound(g, graph_id, seed));
    if g.n() <= MAX_TAIL_VERTICES {
        for d in [1, 2, 3, g.n() - 1] {
            out.push(verify_tree_degree_tail(g, graph_id, d).expect("size checked"));
        }
    }
    out.push(verify_level_function(g, graph_id, config.a, config.sigma, seed));
    out
}

/// Runs every check over the corpus and the random contractions. Verdict
/// order is deterministic.
pub fn run_suite(entries: &[CorpusEntry], config: &SuiteConfig) -> Result<Vec<LemmaVerdict>, LemmaError> {
    let work = || -> Vec<LemmaVerdict> {
        let mut all: Vec<LemmaVerdict> = entries
            .par_iter()
            .flat_map_iter(|e| match &e.graph {
                Some(g) => verify_graph(g, &e.id, config, e.seed),
                None => vec![LemmaVerdict::skipped("generation", &e.id)],
            })
            .collect();
        all.extend(verify_contractions(config.contractions, config.seed));
        all
    };
    if config.threads <= 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .map_err(|e| LemmaError::InvalidParameter(e.to_string()))?;
        Ok(pool.install(work))
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.threads)
            .build()
            .map_err(|e| LemmaError::InvalidParameter(e.to_string()))?;
        Ok(pool.install(work))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSummary {
    pub lemma: String,
    pub asserted: usize,
    pub holds: usize,
    pub violations: usize,
    pub measured: usize,
    pub out_of_hypothesis: usize,
    pub skipped: usize,
    /// Extremes of the in-hypothesis empirical constant, if the check records one.
    pub constant: Option<String>,
    pub constant_min: Option<f64>,
    pub constant_max: Option<f64>,
}

const CONSTANT_KEYS: [(&str, &str); 6] = [
    (ids::QHAT_INVERSE_NORM, "c_inf"),
    (ids::PRINCIPAL_MINOR, "c1"),
    (ids::VERTEX_DELETION, "c2"),
    (ids::TREE_DEGREE_TAIL, "c3"),
    (ids::TREE_REMOVAL_DET, "c4"),
    (ids::LEVEL_FUNCTION, "H"),
];

pub fn summarize(verdicts: &[LemmaVerdict]) -> Vec<LemmaSummary> {
    let mut by_lemma: BTreeMap<&str, Vec<&LemmaVerdict>> = BTreeMap::new();
    for v in verdicts {
        by_lemma.entry(v.lemma.as_str()).or_default().push(v);
    }
    by_lemma
        .into_iter()
        .map(|(lemma, vs)| {
            let count = |s: VerdictStatus| vs.iter().filter(|v| v.status == s).count();
            let key = CONSTANT_KEYS.iter().find(|(l, _)| *l == lemma).map(|(_, k)| *k);
            let values: Vec<f64> = key
                .map(|k| {
                    vs.iter()
                        .filter(|v| matches!(v.status, VerdictStatus::Asserted | VerdictStatus::Measured))
                        .filter_map(|v| v.params.get(k).copied())
                        .filter(|c| c.is_finite())
                        .collect()
                })
                .unwrap_or_default();
            let constant_min = values.iter().copied().reduce(f64::min);
            let constant_max = values.iter().copied().reduce(f64::max);
            LemmaSummary {
                lemma: lemma.to_string(),
                asserted: count(VerdictStatus::Asserted),
                holds: vs
                    .iter()
                    .filter(|v| v.status == VerdictStatus::Asserted && v.holds)
                    .count(),
                violations: vs.iter().filter(|v| v.is_violation()).count(),
                measured: count(VerdictStatus::Measured),
                out_of_hypothesis: count(VerdictStatus::OutOfHypothesis),
                skipped: count(VerdictStatus::Skipped),
                constant: key.map(str::to_string),
                constant_min,
                constant_max,
            }
        })
        .collect()
}

pub fn verdicts_to_json_lines(verdicts: &[LemmaVerdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&serde_json::to_string(v).expect("verdict serializes"));
        out.push('\n');
    }
    out
}

pub fn summary_to_csv(rows: &[LemmaSummary]) -> Result<String, csv::Error> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv is utf-8"))
}
