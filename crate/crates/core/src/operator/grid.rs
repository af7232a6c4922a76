use serde::Serialize;

use crate::error::{Error, Result};

/// Smallest admissible number of radial intervals.
pub const MIN_NODES: usize = 16;

/// Uniform radial grid `r_i = i h`, `h = 1/N`, `i = 1..=N`.
///
/// The origin is not a node; fields vanish there and enter the stencils as
/// zero boundary values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RadialGrid {
    n: usize,
}

impl RadialGrid {
    pub fn new(n: usize) -> Result<Self> {
        if n < MIN_NODES {
            return Err(Error::InvalidInput(format!(
                "radial grid needs N >= {MIN_NODES}, got {n}"
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// `r_i` for `i` in `0..=N`.
    #[inline]
    pub fn node(&self, i: usize) -> f64 {
        i as f64 / self.n as f64
    }

    /// `r_{i+1/2}` for `i` in `0..N`.
    #[inline]
    pub fn half_node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.n as f64
    }

    /// Interior and boundary nodes `r_1..=r_N`.
    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n).map(move |i| self.node(i))
    }

    /// Doubled resolution, for Richardson extrapolation.
    pub fn refined(&self) -> Self {
        Self { n: 2 * self.n }
    }
}
