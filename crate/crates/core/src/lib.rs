//! Spectral solver and quenched time-domain simulator for spherically
//! symmetric mean-field α² dynamos.

pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod io;
pub mod matrix;
pub mod operator;
pub mod reversal;
pub mod specialfn;
pub mod spectral;

pub use error::{Error, Result};
pub use matrix::DenseMatrix;
pub use num_complex::Complex64;
