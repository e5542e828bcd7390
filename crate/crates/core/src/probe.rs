//! Numerical probes of the circle-contour integral behind the circuit count.
//!
//! For angles `theta` the weight of a directed spanning tree is
//! `prod (1 + i tan(theta_j - theta_k))` over its arcs `j -> k`. Summed over
//! all roots this equals `det(Q_hat + iB) / n`, where `B` is the Laplacian-like
//! matrix built from `tan(theta_j - theta_k)`. This module evaluates both
//! sides, the integrand over the hyperplane `L = {sum theta = 0}`, and
//! Monte-Carlo integrals of it near the origin.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::det_q_hat;
use crate::graph::{for_each_spanning_tree, Graph};
use crate::spectral::q_hat_f64;

/// Largest graph accepted by [`tree_sum_brute`].
pub const MAX_BRUTE_VERTICES: usize = 7;
pub const DEFAULT_EPSILON: f64 = 0.1;
/// Below this acceptance rate the sampler gives up.
pub const MIN_ACCEPTANCE: f64 = 1e-4;
const CHUNK: usize = 4096;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProbeError {
    #[error("theta has {got} components, graph has {n} vertices")]
    DimensionMismatch { got: usize, n: usize },
    #[error("edge ({u}, {v}) has |theta_u - theta_v| = {delta} >= pi/2")]
    AngleTooLarge { u: usize, v: usize, delta: f64 },
    #[error("brute-force tree sum limited to {MAX_BRUTE_VERTICES} vertices, got {0}")]
    TooLarge(usize),
    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },
    #[error("acceptance rate {rate:e} below {MIN_ACCEPTANCE:e} (half-width {half_width}, n = {n})")]
    LowAcceptance { rate: f64, half_width: f64, n: usize },
    #[error("half-width {0} leaves edge differences outside (-pi/2, pi/2)")]
    RegionTooWide(f64),
    #[error("graph must be connected with all degrees even")]
    NotEulerian,
    #[error("need n >= 2, got {0}")]
    TooSmall(usize),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl ProbeError {
    pub fn code(&self) -> &'static str {
        match self {
            ProbeError::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            ProbeError::AngleTooLarge { .. } => "ANGLE_TOO_LARGE",
            ProbeError::TooLarge(_) => "SIZE_GUARD",
            ProbeError::TooFewSamples { .. } => "TOO_FEW_SAMPLES",
            ProbeError::LowAcceptance { .. } => "LOW_ACCEPTANCE",
            ProbeError::RegionTooWide(_) => "REGION_TOO_WIDE",
            ProbeError::NotEulerian => "NOT_EULERIAN",
            ProbeError::TooSmall(_) => "TOO_SMALL",
            ProbeError::InvalidParameter(_) => "INVALID_PARAMETER",
        }
    }
}

/// Angles at the vertices of a graph, with the derived quantities the
/// integrand needs.
#[derive(Debug, Clone, PartialEq)]
pub struct ThetaPoint {
    pub theta: Vec<f64>,
    /// `theta_u - theta_v` for each edge `(u, v)`, `u < v`, in edge order.
    pub delta: Vec<f64>,
    /// `B_jk = -tan(theta_j - theta_k)` on edges, `B_jj = sum_l tan(theta_j - theta_l)`.
    pub b_matrix: DMatrix<f64>,
    /// Components of `Q theta`.
    pub lambda_diag: Vec<f64>,
    pub mean: f64,
}

impl ThetaPoint {
    pub fn new(g: &Graph, theta: Vec<f64>) -> Result<Self, ProbeError> {
        let n = g.n();
        if theta.len() != n {
            return Err(ProbeError::DimensionMismatch { got: theta.len(), n });
        }
        let delta: Vec<f64> = g.edges().iter().map(|&(u, v)| theta[u] - theta[v]).collect();
        let mut b = DMatrix::zeros(n, n);
        let mut lambda_diag = vec![0.0; n];
        for (&(u, v), &d) in g.edges().iter().zip(&delta) {
            let t = d.tan();
            b[(u, v)] = -t;
            b[(v, u)] = t;
            b[(u, u)] += t;
            b[(v, v)] -= t;
            lambda_diag[u] += d;
            lambda_diag[v] -= d;
        }
        let mean = theta.iter().sum::<f64>() / n as f64;
        Ok(ThetaPoint {
            theta,
            delta,
            b_matrix: b,
            lambda_diag,
            mean,
        })
    }

    pub fn negated(&self, g: &Graph) -> Self {
        ThetaPoint::new(g, self.theta.iter().map(|x| -x).collect()).expect("same dimension")
    }

    fn check_angles(&self, g: &Graph) -> Result<(), ProbeError> {
        for (&(u, v), &delta) in g.edges().iter().zip(&self.delta) {
            if delta.abs() >= FRAC_PI_2 {
                return Err(ProbeError::AngleTooLarge { u, v, delta });
            }
        }
        Ok(())
    }
}

/// `det(Q_hat + iB) / n` by complex LU.
pub fn tree_sum_det(g: &Graph, theta: &ThetaPoint) -> Complex64 {
    let n = g.n();
    let qh = q_hat_f64(g);
    let m = DMatrix::from_fn(n, n, |i, j| Complex64::new(qh[(i, j)], theta.b_matrix[(i, j)]));
    m.lu().determinant() / n as f64
}

/// Sum over roots `r` and spanning trees `T` of `prod (1 + i tan(theta_j - theta_k))`
/// over the arcs `j -> k` of `T` directed toward `r`.
pub fn tree_sum_brute(g: &Graph, theta: &ThetaPoint) -> Result<Complex64, ProbeError> {
    let n = g.n();
    if n > MAX_BRUTE_VERTICES {
        return Err(ProbeError::TooLarge(n));
    }
    if theta.theta.len() != n {
        return Err(ProbeError::DimensionMismatch {
            got: theta.theta.len(),
            n,
        });
    }
    let weight = |j: usize, k: usize| Complex64::new(1.0, (theta.theta[j] - theta.theta[k]).tan());
    let mut total = Complex64::new(0.0, 0.0);
    let mut adjacency = vec![Vec::new(); n];
    for_each_spanning_tree(g, |tree| {
        for list in adjacency.iter_mut() {
            list.clear();
        }
        for &(u, v) in tree {
            adjacency[u].push(v);
            adjacency[v].push(u);
        }
        for root in 0..n {
            let mut product = Complex64::new(1.0, 0.0);
            let mut stack = vec![(root, usize::MAX)];
            while let Some((v, parent)) = stack.pop() {
                for &w in &adjacency[v] {
                    if w != parent {
                        product *= weight(w, v);
                        stack.push((w, v));
                    }
                }
            }
            total += product;
        }
    });
    Ok(total)
}

/// `prod_edges cos(Delta) * det(Q_hat + iB) / n`, the root-summed integrand.
pub fn integrand_f(g: &Graph, theta: &ThetaPoint) -> Result<Complex64, ProbeError> {
    theta.check_angles(g)?;
    let cos_product: f64 = theta.delta.iter().map(|d| d.cos()).product();
    Ok(tree_sum_det(g, theta) * cos_product)
}

/// Result of a Monte-Carlo integral over `L` intersected with a cube.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean_re: f64,
    pub mean_im: f64,
    pub std_error: f64,
    pub samples: usize,
    pub accepted: usize,
    /// Measure of the integration region within `L`.
    pub region_volume: f64,
    pub region_volume_std_error: f64,
    pub half_width: f64,
    pub epsilon: Option<f64>,
}

impl McEstimate {
    pub fn mean(&self) -> Complex64 {
        Complex64::new(self.mean_re, self.mean_im)
    }

    fn scaled(mut self, factor: f64) -> Self {
        self.mean_re *= factor;
        self.mean_im *= factor;
        self.std_error *= factor.abs();
        self
    }
}

/// Draws the free coordinates `theta_1..theta_{n-1}` uniformly from
/// `[-h, h]` and sets `theta_n = -sum`. Returns `None` when `|theta_n| > h`.
/// Accepted points are uniform on `L ∩ [-h, h]^n`.
pub fn sample_l_box<R: Rng + ?Sized>(n: usize, half_width: f64, rng: &mut R) -> Option<Vec<f64>> {
    let mut theta = Vec::with_capacity(n);
    let mut sum = 0.0;
    for _ in 0..n - 1 {
        let x = rng.gen_range(-half_width..=half_width);
        sum += x;
        theta.push(x);
    }
    (sum.abs() <= half_width).then(|| {
        theta.push(-sum);
        theta
    })
}

/// Rejection-samples one point of `L ∩ [-h, h]^n`.
pub fn sample_theta<R: Rng + ?Sized>(n: usize, half_width: f64, rng: &mut R) -> Vec<f64> {
    loop {
        if let Some(t) = sample_l_box(n, half_width, rng) {
            return t;
        }
    }
}

/// Half-width `n^(-1/2 + epsilon)` of the dominant region.
pub fn v0_half_width(n: usize, epsilon: f64) -> f64 {
    (n as f64).powf(-0.5 + epsilon)
}

#[derive(Default, Clone, Copy)]
struct Moments {
    hits: usize,
    re: f64,
    im: f64,
    sq: f64,
}

impl Moments {
    fn add(self, o: Moments) -> Moments {
        Moments {
            hits: self.hits + o.hits,
            re: self.re + o.re,
            im: self.im + o.im,
            sq: self.sq + o.sq,
        }
    }
}

/// `∫ f dL` over `L ∩ [-h, h]^n`.
///
/// Sample `i` draws from ChaCha stream `i` of `seed`, and partial sums are
/// combined in index order, so the result does not depend on `threads`.
pub fn mc_integrate_on_l<F>(
    n: usize,
    half_width: f64,
    samples: usize,
    seed: u64,
    threads: usize,
    f: F,
) -> Result<McEstimate, ProbeError>
where
    F: Fn(&[f64]) -> Result<Complex64, ProbeError> + Sync,
{
    if n < 2 {
        return Err(ProbeError::TooSmall(n));
    }
    if samples < 2 {
        return Err(ProbeError::TooFewSamples { min: 2, got: samples });
    }
    if !(half_width > 0.0 && half_width.is_finite()) {
        return Err(ProbeError::InvalidParameter(format!("half-width {half_width}")));
    }
    let base = ChaCha8Rng::seed_from_u64(seed);
    let chunk = |c: usize| -> Result<Moments, ProbeError> {
        let mut m = Moments::default();
        for i in c * CHUNK..((c + 1) * CHUNK).min(samples) {
            let mut rng = base.clone();
            rng.set_stream(i as u64);
            if let Some(theta) = sample_l_box(n, half_width, &mut rng) {
                let y = f(&theta)?;
                m.hits += 1;
                m.re += y.re;
                m.im += y.im;
                m.sq += y.norm_sqr();
            }
        }
        Ok(m)
    };
    let chunks = samples.div_ceil(CHUNK);
    let parts: Vec<Moments> = if threads <= 1 {
        (0..chunks).map(chunk).collect::<Result<_, _>>()?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| ProbeError::InvalidParameter(e.to_string()))?;
        pool.install(|| (0..chunks).into_par_iter().map(chunk).collect::<Result<_, _>>())?
    };
    let total = parts.into_iter().fold(Moments::default(), Moments::add);

    let count = samples as f64;
    let rate = total.hits as f64 / count;
    if rate < MIN_ACCEPTANCE {
        return Err(ProbeError::LowAcceptance { rate, half_width, n });
    }
    let box_volume = (n as f64).sqrt() * (2.0 * half_width).powi(n as i32 - 1);
    let (mean_re, mean_im) = (total.re / count, total.im / count);
    let variance = (total.sq / count - mean_re * mean_re - mean_im * mean_im).max(0.0) * count / (count - 1.0);
    Ok(McEstimate {
        mean_re: box_volume * mean_re,
        mean_im: box_volume * mean_im,
        std_error: box_volume * (variance / count).sqrt(),
        samples,
        accepted: total.hits,
        region_volume: box_volume * rate,
        region_volume_std_error: box_volume * (rate * (1.0 - rate) / count).sqrt(),
        half_width,
        epsilon: None,
    })
}

/// Monte-Carlo estimate of the dominant-region integral
/// `S0 = pi sqrt(n) ∫_{L ∩ V0} integrand_f / n dL` with
/// `V0 = {|theta_j| <= n^(-1/2 + epsilon)}`.
pub fn mc_s0(g: &Graph, epsilon: f64, samples: usize, seed: u64) -> Result<McEstimate, ProbeError> {
    mc_s0_with_threads(g, epsilon, samples, seed, 1)
}

pub fn mc_s0_with_threads(
    g: &Graph,
    epsilon: f64,
    samples: usize,
    seed: u64,
    threads: usize,
) -> Result<McEstimate, ProbeError> {
    let n = g.n();
    if n < 2 {
        return Err(ProbeError::TooSmall(n));
    }
    if !(g.is_connected() && g.all_even()) {
        return Err(ProbeError::NotEulerian);
    }
    if samples < 100 {
        return Err(ProbeError::TooFewSamples { min: 100, got: samples });
    }
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(ProbeError::InvalidParameter(format!(
            "epsilon {epsilon} outside (0, 1/2)"
        )));
    }
    let half_width = v0_half_width(n, epsilon);
    // Edge differences reach 2h; they must stay inside (-pi/2, pi/2).
    if 2.0 * half_width >= FRAC_PI_2 {
        return Err(ProbeError::RegionTooWide(half_width));
    }
    let nf = n as f64;
    let est = mc_integrate_on_l(n, half_width, samples, seed, threads, |theta| {
        let point = ThetaPoint::new(g, theta.to_vec())?;
        Ok(integrand_f(g, &point)? / nf)
    })?;
    Ok(McEstimate {
        epsilon: Some(epsilon),
        ..est.scaled(PI * nf.sqrt())
    })
}

/// `∫_L exp(-a θᵀ Q_hat θ) dL = pi^((n-1)/2) a^(-(n-1)/2) sqrt(n) / sqrt(det Q_hat)`.
pub fn gaussian_reference(g: &Graph, a: f64) -> f64 {
    let n = g.n() as f64;
    let log2_det = crate::log2_big(&det_q_hat(g).magnitude().clone());
    let half = (n - 1.0) / 2.0;
    (half * PI.log2() - half * a.log2() + 0.5 * n.log2() - 0.5 * log2_det).exp2()
}

/// `∫_{R^n} exp(-a θᵀ Q_hat θ) dθ = pi^(n/2) a^(-n/2) / sqrt(det Q_hat)`.
pub fn gaussian_reference_full(g: &Graph, a: f64) -> f64 {
    let n = g.n() as f64;
    let log2_det = crate::log2_big(&det_q_hat(g).magnitude().clone());
    (n / 2.0 * PI.log2() - n / 2.0 * a.log2() - 0.5 * log2_det).exp2()
}

/// Monte-Carlo `∫_{L ∩ [-h, h]^n} exp(-a θᵀ Q_hat θ) dL`, used to calibrate
/// the sampler against [`gaussian_reference`].
pub fn mc_gaussian_on_l(
    g: &Graph,
    a: f64,
    half_width: f64,
    samples: usize,
    seed: u64,
) -> Result<McEstimate, ProbeError> {
    let qh = q_hat_f64(g);
    let n = g.n();
    mc_integrate_on_l(n, half_width, samples, seed, 1, |theta| {
        let t = nalgebra::DVector::from_column_slice(theta);
        let quad = t.dot(&(&qh * &t));
        Ok(Complex64::new((-a * quad).exp(), 0.0))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub n: usize,
    #[serde(rename = "E")]
    pub edges: usize,
    pub epsilon: f64,
    pub samples: usize,
    pub seed: u64,
    pub mean_re: f64,
    pub mean_im: f64,
    pub std_error: f64,
    #[serde(rename = "S_exact")]
    pub s_exact: Option<f64>,
    pub ratio: Option<f64>,
}

impl ProbeReport {
    pub fn new(g: &Graph, est: &McEstimate, seed: u64, s_exact: Option<f64>) -> Self {
        ProbeReport {
            n: g.n(),
            edges: g.edge_count(),
            epsilon: est.epsilon.unwrap_or(f64::NAN),
            samples: est.samples,
            seed,
            mean_re: est.mean_re,
            mean_im: est.mean_im,
            std_error: est.std_error,
            s_exact,
            ratio: s_exact.map(|s| est.mean_re / s),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::spanning_tree_count;
    use num_traits::ToPrimitive;

    fn close(a: Complex64, b: Complex64, rel: f64) -> bool {
        (a - b).norm() <= rel * b.norm().max(1e-300)
    }

    #[test]
    fn zero_angles_give_n_times_tree_count() {
        for g in [Graph::complete(3), Graph::complete(5), Graph::bowtie(), Graph::cycle(6)] {
            let n = g.n() as f64;
            let t = spanning_tree_count(&g).to_f64().unwrap();
            let p = ThetaPoint::new(&g, vec![0.0; g.n()]).unwrap();
            let expected = Complex64::new(n * t, 0.0);
            assert!(close(tree_sum_det(&g, &p), expected, 1e-12));
            assert!(close(tree_sum_brute(&g, &p).unwrap(), expected, 1e-12));
            assert!(close(integrand_f(&g, &p).unwrap(), expected, 1e-12));
        }
        let k3 = Graph::complete(3);
        let p = ThetaPoint::new(&k3, vec![0.0; 3]).unwrap();
        assert!(close(integrand_f(&k3, &p).unwrap(), Complex64::new(9.0, 0.0), 1e-14));
    }

    #[test]
    fn single_edge_brute_sum() {
        let g = Graph::complete(2);
        let t = 0.3;
        let p = ThetaPoint::new(&g, vec![t, -t]).unwrap();
        assert!(close(tree_sum_brute(&g, &p).unwrap(), Complex64::new(2.0, 0.0), 1e-14));
        assert!(close(tree_sum_det(&g, &p), Complex64::new(2.0, 0.0), 1e-12));
    }

    #[test]
    fn triangle_both_routes_agree() {
        let g = Graph::complete(3);
        let t = 0.2;
        let p = ThetaPoint::new(&g, vec![t, 0.0, -t]).unwrap();
        let brute = tree_sum_brute(&g, &p).unwrap();
        assert!(brute.re.is_finite() && brute.im.is_finite());
        assert!(close(tree_sum_det(&g, &p), brute, 1e-12));
    }

    #[test]
    fn theta_point_invariants() {
        let g = Graph::bowtie();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let p = ThetaPoint::new(&g, sample_theta(5, 0.4, &mut rng)).unwrap();
        assert!(p.mean.abs() < 1e-12);
        for i in 0..5 {
            assert!(p.b_matrix.row(i).sum().abs() < 1e-12);
        }
        // Q theta
        let q = crate::spectral::laplacian_f64(&g);
        let qt = &q * nalgebra::DVector::from_vec(p.theta.clone());
        for i in 0..5 {
            assert!((qt[i] - p.lambda_diag[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn conjugate_symmetry() {
        let g = Graph::complete(5);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..10 {
            let p = ThetaPoint::new(&g, sample_theta(5, 0.5, &mut rng)).unwrap();
            let a = integrand_f(&g, &p).unwrap();
            let b = integrand_f(&g, &p.negated(&g)).unwrap();
            assert!(close(a.conj(), b, 1e-12));
        }
    }

    #[test]
    fn errors() {
        let g = Graph::complete(3);
        assert!(matches!(
            ThetaPoint::new(&g, vec![0.0; 2]),
            Err(ProbeError::DimensionMismatch { .. })
        ));
        let p = ThetaPoint::new(&g, vec![1.0, -1.0, 0.0]).unwrap();
        assert_eq!(integrand_f(&g, &p).unwrap_err().code(), "ANGLE_TOO_LARGE");
        let k8 = Graph::complete(8);
        let p = ThetaPoint::new(&k8, vec![0.0; 8]).unwrap();
        assert_eq!(tree_sum_brute(&k8, &p).unwrap_err().code(), "SIZE_GUARD");
        assert_eq!(
            mc_s0(&Graph::complete(4), 0.1, 1000, 1).unwrap_err().code(),
            "NOT_EULERIAN"
        );
        assert_eq!(
            mc_s0(&Graph::complete(5), 0.1, 10, 1).unwrap_err().code(),
            "TOO_FEW_SAMPLES"
        );
        assert_eq!(
            mc_s0(&Graph::complete(3), 0.45, 1000, 1).unwrap_err().code(),
            "REGION_TOO_WIDE"
        );
    }

    #[test]
    fn constant_integrand_measures_the_region() {
        let samples = 200_000;
        let est = mc_integrate_on_l(4, 0.5, samples, 9, 1, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((est.mean_re - est.region_volume).abs() < 1e-9 * est.region_volume);
        assert!(est.std_error / est.mean_re < 3.0 / (samples as f64).sqrt());
        // L ∩ [-h,h]^n for n = 2 is a segment of length 2 sqrt(2) h.
        let seg = mc_integrate_on_l(2, 0.5, 1000, 1, 1, |_| Ok(Complex64::new(1.0, 0.0))).unwrap();
        assert!((seg.region_volume - 2f64.sqrt()).abs() < 1e-12);
        assert_eq!(seg.accepted, 1000);
    }

    #[test]
    fn thread_count_does_not_change_result() {
        let g = Graph::complete(5);
        let a = mc_s0_with_threads(&g, 0.1, 20_000, 42, 1).unwrap();
        let b = mc_s0_with_threads(&g, 0.1, 20_000, 42, 4).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn gaussian_reference_examples() {
        let k2 = Graph::complete(2);
        assert!((gaussian_reference(&k2, 0.5) - PI.sqrt()).abs() < 1e-12);
        let k3 = Graph::complete(3);
        assert!((gaussian_reference(&k3, 1.0) - PI / 3.0).abs() < 1e-12);
        for g in [Graph::bowtie(), Graph::complete(5)] {
            let ratio = gaussian_reference(&g, 0.3) / gaussian_reference(&g, 1.2);
            let expected = 4f64.powf((g.n() as f64 - 1.0) / 2.0);
            assert!((ratio / expected - 1.0).abs() < 1e-12);
        }
        assert!((gaussian_reference_full(&k2, 0.5) - PI).abs() < 1e-12);
    }

    #[test]
    fn gaussian_calibration_small() {
        let g = Graph::complete(2);
        let est = mc_gaussian_on_l(&g, 0.5, 4.0, 100_000, 3).unwrap();
        let truth = gaussian_reference(&g, 0.5);
        assert!((est.mean_re - truth).abs() <= 3.0 * est.std_error, "{est:?} vs {truth}");
    }
}
