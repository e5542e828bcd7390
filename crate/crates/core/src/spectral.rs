//! Floating-point spectral tools for graph Laplacians.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{laplacian, q_hat};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("spectral norm {0} is not below 1")]
    NotContraction(f64),
    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPsd(f64),
    #[error("expansion order must be at least 2, got {0}")]
    BadOrder(usize),
}

/// Scale-aware eigenvalue tolerance for an `n`-vertex Laplacian.
pub fn eigen_tolerance(n: usize) -> f64 {
    1e-8 * n as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Algebraic connectivity, the second-smallest eigenvalue (0 when n = 1).
    pub lambda1: f64,
    pub lambda_max: f64,
    /// `lambda1 / n`.
    pub sigma_hat: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub norm1: f64,
    pub norm_inf: f64,
    pub norm2: f64,
    pub norm_hs: f64,
}

fn check_square(m: &DMatrix<f64>) -> Result<(), SpectralError> {
    if m.nrows() != m.ncols() {
        return Err(SpectralError::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

fn asymmetry(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn is_symmetric(m: &DMatrix<f64>) -> bool {
    m.nrows() == m.ncols() && asymmetry(m) <= 1e-12 * (1.0 + m.amax())
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<f64>, SpectralError> {
    check_square(m)?;
    if !is_symmetric(m) {
        return Err(SpectralError::NotSymmetric(asymmetry(m)));
    }
    let mut ev: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

pub fn eigen_spectrum(q: &DMatrix<f64>) -> Result<SpectralSummary, SpectralError> {
    let eigenvalues = symmetric_eigenvalues(q)?;
    let n = eigenvalues.len();
    let lambda1 = eigenvalues.get(1).copied().unwrap_or(0.0);
    Ok(SpectralSummary {
        lambda_max: eigenvalues.last().copied().unwrap_or(0.0),
        sigma_hat: if n == 0 { 0.0 } else { lambda1 / n as f64 },
        lambda1,
        eigenvalues,
    })
}

pub fn laplacian_f64(g: &Graph) -> DMatrix<f64> {
    laplacian(g).to_f64()
}

pub fn q_hat_f64(g: &Graph) -> DMatrix<f64> {
    q_hat(&laplacian(g)).to_f64()
}

/// Spectrum of the graph Laplacian.
pub fn graph_spectrum(g: &Graph) -> SpectralSummary {
    eigen_spectrum(&laplacian_f64(g)).expect("Laplacian is symmetric")
}

pub fn algebraic_connectivity(g: &Graph) -> f64 {
    graph_spectrum(g).lambda1
}

/// Spectral norm: largest |eigenvalue| for symmetric input, largest singular
/// value otherwise.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if is_symmetric(m) {
        m.clone().symmetric_eigenvalues().amax()
    } else {
        singular_norm(m)
    }
}

fn singular_norm(m: &DMatrix<f64>) -> f64 {
    m.clone().singular_values().max()
}

pub fn norms(m: &DMatrix<f64>) -> NormReport {
    if m.is_empty() {
        return NormReport {
            norm1: 0.0,
            norm_inf: 0.0,
            norm2: 0.0,
            norm_hs: 0.0,
        };
    }
    let norm1 = m
        .column_iter()
        .map(|c| c.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let norm_inf = m
        .row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    NormReport {
        norm1,
        norm_inf,
        norm2: spectral_norm(m),
        norm_hs: m.norm(),
    }
}

pub fn det_f64(m: &DMatrix<f64>) -> f64 {
    m.clone().lu().determinant()
}

/// Truncated trace series for `det(I + X)` and the bound on the remainder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDetExpansion {
    /// `exp(sum_{r<m} (-1)^(r+1) tr(X^r) / r)`.
    pub approx: f64,
    /// `(n/m) ||X||_2^m / (1 - ||X||_2)`, a bound on `|log det(I+X) - log approx|`.
    pub bound: f64,
    pub order: usize,
    pub norm2: f64,
}

pub fn log_det_expansion(x: &DMatrix<f64>, order: usize) -> Result<LogDetExpansion, SpectralError> {
    check_square(x)?;
    if order < 2 {
        return Err(SpectralError::BadOrder(order));
    }
    let n = x.nrows();
    let norm2 = spectral_norm(x);
    if norm2 >= 1.0 {
        return Err(SpectralError::NotContraction(norm2));
    }
    let mut power = DMatrix::<f64>::identity(n, n);
    let mut series = 0.0;
    for r in 1..order {
        power = &power * x;
        let sign = if r % 2 == 1 { 1.0 } else { -1.0 };
        series += sign * power.trace() / r as f64;
    }
    Ok(LogDetExpansion {
        approx: series.exp(),
        bound: n as f64 / order as f64 * norm2.powi(order as i32) / (1.0 - norm2),
        order,
        norm2,
    })
}

/// `(det(I - X), exp(-tr X / (1 - ||X||_2)))` for symmetric PSD `X` with
/// `||X||_2 < 1`. The first should never fall below the second.
pub fn det_lower_bound_check(x: &DMatrix<f64>) -> Result<(f64, f64), SpectralError> {
    let ev = symmetric_eigenvalues(x)?;
    let n = ev.len();
    if let Some(&min) = ev.first() {
        if min < -eigen_tolerance(n.max(1)) {
            return Err(SpectralError::NotPsd(min));
        }
    }
    let norm2 = ev.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if norm2 >= 1.0 {
        return Err(SpectralError::NotContraction(norm2));
    }
    let lhs = det_f64(&(DMatrix::<f64>::identity(n, n) - x));
    let rhs = (-x.trace() / (1.0 - norm2)).exp();
    Ok((lhs, rhs))
}

/// `A^{-1/2} B A^{-1/2}` for symmetric positive definite `A`. Shares its
/// eigenvalues with `B A^{-1}` but is symmetric.
pub fn congruence_by_inverse_sqrt(b: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let eig = a.clone().symmetric_eigen();
    let inv_sqrt = eig.eigenvalues.map(|l| 1.0 / l.sqrt());
    let s = &eig.eigenvectors * DMatrix::from_diagonal(&inv_sqrt) * eig.eigenvectors.transpose();
    let out = &s * b * &s;
    (&out + out.transpose()) * 0.5
}
