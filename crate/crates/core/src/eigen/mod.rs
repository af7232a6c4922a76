//! Dense real nonsymmetric eigenvalues: balancing, Householder reduction to
//! Hessenberg form and Francis double-shift QR.

mod hessenberg;
mod matching;
mod qr;
mod residual;

pub use matching::{match_branches, match_lambdas, BranchMatching, Coalescence, CoalescenceKind};
pub use qr::IterationStats;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::operator::OperatorMatrix;

/// Relative distance below which two eigenvalues are tagged as clustered.
pub const CLUSTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Multiplicity {
    Simple,
    Clustered,
}

/// One eigenvalue `λ = p + 2πi f`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenPair {
    pub lambda: Complex64,
    /// `‖(H - λ)x‖ / (‖H‖ ‖x‖)` from inverse iteration, when requested.
    pub residual: Option<f64>,
    pub multiplicity: Multiplicity,
}

impl EigenPair {
    pub fn growth_rate(&self) -> f64 {
        self.lambda.re
    }

    /// Frequency per diffusion time, `Im λ / 2π`.
    pub fn frequency(&self) -> f64 {
        self.lambda.im / std::f64::consts::TAU
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumResult {
    /// Sorted by descending real part; `+Im` before `-Im` on ties.
    pub pairs: Vec<EigenPair>,
    pub dim: usize,
    pub stats: IterationStats,
    /// Infinity norm of the input matrix.
    pub norm: f64,
}

impl SpectrumResult {
    pub fn lambdas(&self) -> Vec<Complex64> {
        self.pairs.iter().map(|p| p.lambda).collect()
    }

    pub fn leading(&self) -> Option<&EigenPair> {
        self.pairs.first()
    }

    pub fn max_re(&self) -> f64 {
        self.pairs.first().map_or(f64::NEG_INFINITY, |p| p.lambda.re)
    }

    pub fn max_abs_im(&self) -> f64 {
        self.pairs.iter().map(|p| p.lambda.im.abs()).fold(0.0, f64::max)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SolverOptions {
    pub balance: bool,
    /// Number of leading eigenvalues that get an inverse-iteration residual.
    pub residuals: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            balance: true,
            residuals: 0,
        }
    }
}

/// Anything the solver can take a spectrum of.
pub trait AsDense {
    fn as_dense(&self) -> &DenseMatrix;
}

impl AsDense for DenseMatrix {
    fn as_dense(&self) -> &DenseMatrix {
        self
    }
}

impl AsDense for OperatorMatrix {
    fn as_dense(&self) -> &DenseMatrix {
        self.matrix()
    }
}

pub fn eigenvalues<M: AsDense + ?Sized>(m: &M) -> Result<SpectrumResult> {
    eigenvalues_with(m, SolverOptions::default())
}

pub fn eigenvalues_with<M: AsDense + ?Sized>(m: &M, options: SolverOptions) -> Result<SpectrumResult> {
    let m = m.as_dense();
    if !m.is_square() {
        return Err(Error::InvalidInput(format!(
            "matrix is {}x{}, not square",
            m.rows(),
            m.cols()
        )));
    }
    if m.rows() == 0 {
        return Err(Error::InvalidInput("empty matrix".into()));
    }
    if let Some((row, col)) = m.find_non_finite() {
        return Err(Error::NonFinite { row, col });
    }
    let norm = m.norm_inf();

    let mut h = m.clone();
    if options.balance {
        hessenberg::balance(&mut h);
    }
    hessenberg::reduce_to_hessenberg(&mut h);
    let hess = (options.residuals > 0).then(|| h.clone());
    let (mut lambdas, stats) = qr::hessenberg_eigenvalues(&mut h)?;
    sort_descending(&mut lambdas);

    let mut pairs: Vec<EigenPair> = tag_clusters(&lambdas)
        .into_iter()
        .zip(&lambdas)
        .map(|(multiplicity, &lambda)| EigenPair {
            lambda,
            residual: None,
            multiplicity,
        })
        .collect();

    if let Some(hess) = hess {
        let k = options.residuals.min(pairs.len());
        for p in &mut pairs[..k] {
            p.residual = Some(residual::inverse_iteration_residual(&hess, p.lambda));
        }
    }

    Ok(SpectrumResult {
        pairs,
        dim: m.rows(),
        stats,
        norm,
    })
}

/// Descending real part; within equal real parts `+Im` comes first.
pub fn sort_descending(v: &mut [Complex64]) {
    v.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
}

fn tag_clusters(sorted: &[Complex64]) -> Vec<Multiplicity> {
    let mut tags = vec![Multiplicity::Simple; sorted.len()];
    let scale = sorted.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for i in 0..sorted.len() {
        for j in i + 1..sorted.len() {
            // sorted by Re, so later entries only get further away in Re
            if sorted[j].re < sorted[i].re - CLUSTER_TOL * scale {
                break;
            }
            if (sorted[i] - sorted[j]).norm() < CLUSTER_TOL * scale {
                tags[i] = Multiplicity::Clustered;
                tags[j] = Multiplicity::Clustered;
            }
        }
    }
    tags
}
