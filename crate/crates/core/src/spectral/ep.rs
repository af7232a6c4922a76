use num_complex::Complex64;
use serde::Serialize;

use super::sweep::{im_tol_abs, SpectralFamily, Sweep, SweepOptions};
use crate::eigen::{match_lambdas, CoalescenceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExceptionalPoint {
    pub c_star: f64,
    /// Midpoint of the coalescing pair.
    pub lambda: Complex64,
    pub bracket: (f64, f64),
    pub branch_a: usize,
    pub branch_b: usize,
    /// Orientation with increasing parameter.
    pub kind: CoalescenceKind,
    /// `min(|λ_a - λ_b|, 2 |Im λ_a|)` at the real side of the final bracket.
    pub gap: f64,
    /// False when refinement met a state that is neither a real pair nor a
    /// conjugate pair, e.g. two EPs closer than the tolerance.
    pub resolved: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpOptions {
    /// Absolute bracket width at which bisection stops.
    pub tol: f64,
    pub sweep: SweepOptions,
}

impl Default for EpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-4,
            sweep: SweepOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum PairState {
    Real,
    Complex,
    Mixed,
}

fn classify(a: Complex64, b: Complex64, im_tol: f64) -> PairState {
    let real = |z: Complex64| z.im.abs() <= im_tol;
    if real(a) && real(b) {
        PairState::Real
    } else if !real(a) && !real(b) && (a - b.conj()).norm() <= 1e-6 * a.norm().max(1.0) {
        PairState::Complex
    } else {
        PairState::Mixed
    }
}

/// Localises every real/complex transition recorded in `sweep` by bisection
/// on `family` (which may be a finer-resolution version of the swept one).
pub fn find_exceptional_points<F: SpectralFamily + ?Sized>(
    family: &F,
    sweep: &Sweep,
    options: EpOptions,
) -> Result<Vec<ExceptionalPoint>> {
    let mut out = Vec::new();
    for t in &sweep.transitions {
        let i = t.step;
        let lo = sweep.params[i];
        let hi = sweep.params[i + 1];
        let pa = sweep.positions[i][t.branch_a];
        let pb = sweep.positions[i][t.branch_b];
        let ep = refine(family, lo, hi, &sweep.leading[i], (pa, pb), t.kind, options)?;
        out.push(ExceptionalPoint {
            branch_a: t.branch_a,
            branch_b: t.branch_b,
            ..ep
        });
    }
    Ok(out)
}

fn leading_at<F: SpectralFamily + ?Sized>(family: &F, p: f64, k: usize) -> Result<Vec<Complex64>> {
    let s = family.spectrum_at(p).map_err(|e| Error::Sweep {
        param: p,
        source: Box::new(e),
    })?;
    Ok(s.pairs.iter().take(k).map(|e| e.lambda).collect())
}

/// Follows the slots `pair` from `from` onto the spectrum `to`.
fn follow(from: &[Complex64], to: &[Complex64], pair: (usize, usize), im_rel: f64) -> (usize, usize) {
    let k = from.len().min(to.len());
    let all: Vec<Complex64> = from[..k].iter().chain(&to[..k]).copied().collect();
    let m = match_lambdas(&from[..k], &to[..k], im_tol_abs(&all, im_rel));
    (m.assignment[pair.0], m.assignment[pair.1])
}

fn refine<F: SpectralFamily + ?Sized>(
    family: &F,
    mut lo: f64,
    mut hi: f64,
    coarse_lo: &[Complex64],
    pair: (usize, usize),
    kind: CoalescenceKind,
    options: EpOptions,
) -> Result<ExceptionalPoint> {
    let k = coarse_lo.len();
    let im_rel = options.sweep.im_tol;
    let lo_state = match kind {
        CoalescenceKind::RealToComplex => PairState::Real,
        CoalescenceKind::ComplexToReal => PairState::Complex,
    };

    // Re-anchor on the refinement family, which may differ from the sweep's.
    let mut lo_spec = leading_at(family, lo, k)?;
    let mut lo_pair = follow(coarse_lo, &lo_spec, pair, im_rel);
    let hi_spec = leading_at(family, hi, k)?;
    let mut hi_pair = follow(&lo_spec, &hi_spec, lo_pair, im_rel);
    let mut hi_spec = hi_spec;
    let state_of = |spec: &[Complex64], p: (usize, usize)| {
        classify(spec[p.0], spec[p.1], im_tol_abs(spec, im_rel))
    };
    let mut resolved = state_of(&lo_spec, lo_pair) == lo_state && state_of(&hi_spec, hi_pair) != lo_state;

    while resolved && hi - lo > options.tol {
        let mid = 0.5 * (lo + hi);
        let spec = leading_at(family, mid, k)?;
        let p = follow(&lo_spec, &spec, lo_pair, im_rel);
        match state_of(&spec, p) {
            s if s == lo_state => {
                lo = mid;
                lo_spec = spec;
                lo_pair = p;
            }
            PairState::Mixed => resolved = false,
            _ => {
                hi = mid;
                hi_spec = spec;
                hi_pair = p;
            }
        }
    }

    let mid_lo = 0.5 * (lo_spec[lo_pair.0] + lo_spec[lo_pair.1]);
    let mid_hi = 0.5 * (hi_spec[hi_pair.0] + hi_spec[hi_pair.1]);
    let (ra, rb) = if lo_state == PairState::Real {
        (lo_spec[lo_pair.0], lo_spec[lo_pair.1])
    } else {
        (hi_spec[hi_pair.0], hi_spec[hi_pair.1])
    };
    Ok(ExceptionalPoint {
        c_star: 0.5 * (lo + hi),
        lambda: 0.5 * (mid_lo + mid_hi),
        bracket: (lo, hi),
        branch_a: pair.0,
        branch_b: pair.1,
        kind,
        gap: (ra - rb).norm().min(2.0 * ra.im.abs()),
        resolved,
    })
}

/// Least-squares slope of `log |Im λ|` against `log |p - p_ep|` on the complex
/// side of an EP, sampling the offsets `deltas`. Close to `0.5` for a
/// square-root branch point.
pub fn fit_branching_exponent<F: SpectralFamily + ?Sized>(
    family: &F,
    ep: &ExceptionalPoint,
    deltas: &[f64],
) -> Result<f64> {
    let side = match ep.kind {
        CoalescenceKind::RealToComplex => 1.0,
        CoalescenceKind::ComplexToReal => -1.0,
    };
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &d in deltas {
        let s = family.spectrum_at(ep.c_star + side * d.abs())?;
        let z = s
            .pairs
            .iter()
            .map(|e| e.lambda)
            .filter(|z| z.im > 0.0)
            .min_by(|a, b| (a - ep.lambda).norm().total_cmp(&(b - ep.lambda).norm()))
            .ok_or_else(|| Error::InvalidInput(format!("no complex eigenvalue at offset {d}")))?;
        xs.push(d.abs().ln());
        ys.push(z.im.ln());
    }
    if xs.len() < 2 {
        return Err(Error::InvalidInput("need at least two offsets".into()));
    }
    Ok(least_squares_slope(&xs, &ys))
}

pub(crate) fn least_squares_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
