//! Criteria evaluators, parameter sweeps, exceptional points and critical
//! amplitudes.

mod criteria;
mod ep;
mod sweep;

pub use criteria::{
    anti_dynamo_check, finiteness_bound, finiteness_norm_check, im_bound_check, im_bound_check_with,
    CriterionId, CriterionReport, IM_BOUND_REL_TOL,
};
pub use ep::{find_exceptional_points, fit_branching_exponent, EpOptions, ExceptionalPoint};
pub use sweep::{
    linspace, sweep, two_by_two_family, ScaledProfile, SpectralBranch, SpectralFamily, Sweep, SweepOptions,
    TransitionEvent,
};

use num_complex::Complex64;
use serde::Serialize;

use crate::eigen::{eigenvalues, match_lambdas};
use crate::error::{Error, Result};
use crate::operator::{assemble, AlphaProfile, RadialGrid};

/// Default resolution for sweeps and critical-amplitude searches.
pub const SWEEP_NODES: usize = 200;
/// Default resolution for accuracy-critical single spectra.
pub const ACCEPTANCE_NODES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    /// Amplitude factor applied to the input shape.
    pub c: f64,
    /// Leading eigenvalue at `c`.
    pub lambda: Complex64,
    pub bracket: (f64, f64),
}

impl CriticalPoint {
    /// Onset with a nonzero frequency.
    pub fn is_oscillatory(&self, im_tol: f64) -> bool {
        self.lambda.im.abs() > im_tol
    }
}

/// Largest real part of the spectrum of `c · shape`.
pub fn max_growth_rate(shape: &AlphaProfile, c: f64, l: u32, grid: RadialGrid) -> Result<Complex64> {
    let s = eigenvalues(&assemble(l, &shape.scaled(c), grid)?)?;
    Ok(s.pairs[0].lambda)
}

/// Bisection on the leading growth rate of `c · shape` over `bracket` until
/// the bracket is narrower than `tol`.
pub fn critical_c(
    shape: &AlphaProfile,
    l: u32,
    bracket: (f64, f64),
    grid: RadialGrid,
    tol: f64,
) -> Result<CriticalPoint> {
    let (mut lo, mut hi) = bracket;
    if !(lo < hi) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let mut f_lo = max_growth_rate(shape, lo, l, grid)?;
    let mut f_hi = max_growth_rate(shape, hi, l, grid)?;
    if f_lo.re.signum() == f_hi.re.signum() {
        return Err(Error::NoSignChange { lo, hi });
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f = max_growth_rate(shape, mid, l, grid)?;
        if f.re.signum() == f_lo.re.signum() {
            lo = mid;
            f_lo = f;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    // linear interpolation of the root inside the final bracket
    let c = lo - f_lo.re * (hi - lo) / (f_hi.re - f_lo.re);
    let lambda = max_growth_rate(shape, c, l, grid)?;
    Ok(CriticalPoint {
        c,
        lambda,
        bracket: (lo, hi),
    })
}

/// One Richardson step for a second-order quantity computed at `h` and `h/2`.
pub fn richardson(coarse: Complex64, fine: Complex64) -> Complex64 {
    fine + (fine - coarse) / 3.0
}

/// Leading `k` eigenvalues at `grid` and at twice its resolution, matched and
/// Richardson-extrapolated.
pub fn extrapolated_leading(profile: &AlphaProfile, l: u32, grid: RadialGrid, k: usize) -> Result<Vec<Complex64>> {
    let take = |g: RadialGrid| -> Result<Vec<Complex64>> {
        let s = eigenvalues(&assemble(l, profile, g)?)?;
        Ok(s.pairs.iter().take(k).map(|p| p.lambda).collect())
    };
    let coarse = take(grid)?;
    let fine = take(grid.refined())?;
    let m = match_lambdas(&coarse, &fine, 1e-9);
    Ok(coarse
        .iter()
        .enumerate()
        .map(|(i, &c)| richardson(c, fine[m.assignment[i]]))
        .collect())
}
