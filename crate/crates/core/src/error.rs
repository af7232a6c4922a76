use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the spectral and time-domain machinery.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("upward recurrence for J_{order} is unstable at x = {x} (x < order)")]
    UnstableRecurrence { order: f64, x: f64 },

    #[error("root search did not converge in bracket [{lo}, {hi}]")]
    RootNotConverged { lo: f64, hi: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("QR iteration stalled on rows {lo}..={hi} after {iterations} iterations")]
    EigenNoConvergence {
        lo: usize,
        hi: usize,
        iterations: usize,
    },

    #[error("leading growth rate has no sign change on [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("spectrum failed at C* = {param}: {source}")]
    Sweep {
        param: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("simulation blew up at t = {t}: max |field| = {max_abs:e}")]
    Unstable { t: f64, max_abs: f64 },

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerics themselves, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::RootNotConverged { .. }
            | Error::NonFinite { .. }
            | Error::EigenNoConvergence { .. }
            | Error::Unstable { .. }
            | Error::UnstableRecurrence { .. } => true,
            Error::Sweep { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
