use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::eigen::{eigenvalues, match_lambdas, BranchMatching, CoalescenceKind, SpectrumResult};
use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::operator::{assemble_with, AlphaProfile, AssemblyScheme, RadialGrid};

/// A one-parameter family of matrices whose spectra are swept.
pub trait SpectralFamily: Sync {
    fn spectrum_at(&self, p: f64) -> Result<SpectrumResult>;
}

impl<F> SpectralFamily for F
where
    F: Fn(f64) -> Result<SpectrumResult> + Sync,
{
    fn spectrum_at(&self, p: f64) -> Result<SpectrumResult> {
        self(p)
    }
}

/// `α = C* · profile`, assembled at degree `l` on a fixed grid.
#[derive(Debug, Clone)]
pub struct ScaledProfile {
    pub profile: AlphaProfile,
    pub l: u32,
    pub grid: RadialGrid,
    pub scheme: AssemblyScheme,
}

impl ScaledProfile {
    pub fn new(profile: AlphaProfile, l: u32, grid: RadialGrid) -> Self {
        Self {
            profile,
            l,
            grid,
            scheme: AssemblyScheme::Flux,
        }
    }

    pub fn with_grid(&self, grid: RadialGrid) -> Self {
        Self { grid, ..self.clone() }
    }
}

impl SpectralFamily for ScaledProfile {
    fn spectrum_at(&self, c_star: f64) -> Result<SpectrumResult> {
        let op = assemble_with(self.l, &self.profile.scaled(c_star), self.grid, self.scheme)?;
        eigenvalues(&op)
    }
}

/// The `[[0, 1], [t, 0]]` family with eigenvalues `±√t`.
pub fn two_by_two_family(t: f64) -> Result<SpectrumResult> {
    eigenvalues(&DenseMatrix::from_rows(&[[0.0, 1.0], [t, 0.0]])?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralBranch {
    pub id: usize,
    pub params: Vec<f64>,
    pub lambdas: Vec<Complex64>,
    /// Step indices `i` (between `params[i]` and `params[i+1]`) where this
    /// branch takes part in a real/complex transition.
    pub coalescences: Vec<usize>,
    /// Step indices where `|Δλ|` exceeded the continuity tolerance.
    pub breaks: Vec<usize>,
}

/// A real/complex transition of two branches between adjacent grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TransitionEvent {
    pub step: usize,
    pub branch_a: usize,
    pub branch_b: usize,
    pub kind: CoalescenceKind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    /// Number of leading eigenvalues followed.
    pub k: usize,
    /// `|Δλ| ≤ continuity · Δp` is expected along a branch; larger jumps are
    /// recorded in [`SpectralBranch::breaks`]. `None` disables the check.
    pub continuity: Option<f64>,
    /// Eigenvalues with `|Im| ≤ im_tol · max(1, |λ|)` count as real.
    pub im_tol: f64,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            k: 6,
            continuity: None,
            im_tol: 1e-9,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Sweep {
    pub params: Vec<f64>,
    /// Leading `k` eigenvalues per grid point, sorted by descending Re.
    pub leading: Vec<Vec<Complex64>>,
    pub matchings: Vec<BranchMatching>,
    pub branches: Vec<SpectralBranch>,
    pub transitions: Vec<TransitionEvent>,
    /// Position of each branch in `leading[i]`.
    pub positions: Vec<Vec<usize>>,
}

impl Sweep {
    pub fn k(&self) -> usize {
        self.branches.len()
    }

    pub fn ambiguous_steps(&self) -> Vec<usize> {
        self.matchings
            .iter()
            .enumerate()
            .filter(|(_, m)| m.ambiguous)
            .map(|(i, _)| i)
            .collect()
    }
}

pub(crate) fn im_tol_abs(lambdas: &[Complex64], rel: f64) -> f64 {
    rel * lambdas.iter().map(|z| z.norm()).fold(1.0, f64::max)
}

/// Solves the family on a strictly increasing grid (in parallel) and
/// continues the `k` leading branches.
pub fn sweep<F: SpectralFamily + ?Sized>(family: &F, grid: &[f64], options: SweepOptions) -> Result<Sweep> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty parameter grid".into()));
    }
    if let Some(w) = grid.windows(2).find(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput(format!(
            "parameter grid must be strictly increasing ({} then {})",
            w[0], w[1]
        )));
    }
    if options.k == 0 {
        return Err(Error::InvalidInput("k must be at least 1".into()));
    }
    let spectra: Vec<Vec<Complex64>> = grid
        .par_iter()
        .map(|&p| {
            family
                .spectrum_at(p)
                .map(|s| s.pairs.iter().take(options.k).map(|e| e.lambda).collect())
                .map_err(|e| Error::Sweep {
                    param: p,
                    source: Box::new(e),
                })
        })
        .collect::<Result<_>>()?;
    let k = spectra.iter().map(Vec::len).min().unwrap_or(0).min(options.k);
    let leading: Vec<Vec<Complex64>> = spectra.into_iter().map(|mut v| {
        v.truncate(k);
        v
    }).collect();
    Ok(continue_branches(grid.to_vec(), leading, options))
}

pub(crate) fn continue_branches(params: Vec<f64>, leading: Vec<Vec<Complex64>>, options: SweepOptions) -> Sweep {
    let k = leading.first().map_or(0, Vec::len);
    let mut branches: Vec<SpectralBranch> = (0..k)
        .map(|id| SpectralBranch {
            id,
            params: params.clone(),
            lambdas: Vec::with_capacity(params.len()),
            coalescences: Vec::new(),
            breaks: Vec::new(),
        })
        .collect();
    let mut pos: Vec<usize> = (0..k).collect();
    let mut positions = vec![pos.clone()];
    let mut matchings = Vec::with_capacity(params.len().saturating_sub(1));
    let mut transitions = Vec::new();
    for b in &mut branches {
        b.lambdas.push(leading[0][b.id]);
    }
    for i in 0..params.len().saturating_sub(1) {
        let (prev, next) = (&leading[i], &leading[i + 1]);
        let tol = im_tol_abs(prev.iter().chain(next).copied().collect::<Vec<_>>().as_slice(), options.im_tol);
        let m = match_lambdas(prev, next, tol);
        // branch occupying each prev slot
        let mut owner = vec![0usize; k];
        for (b, &p) in pos.iter().enumerate() {
            owner[p] = b;
        }
        for c in &m.coalescences {
            let (a, b) = (owner[c.branch_a], owner[c.branch_b]);
            let (a, b) = (a.min(b), a.max(b));
            branches[a].coalescences.push(i);
            branches[b].coalescences.push(i);
            transitions.push(TransitionEvent {
                step: i,
                branch_a: a,
                branch_b: b,
                kind: c.kind,
            });
        }
        for (b, p) in pos.iter_mut().enumerate() {
            *p = m.assignment[*p];
            let lam = next[*p];
            if let Some(cont) = options.continuity {
                let last = *branches[b].lambdas.last().expect("seeded");
                if (lam - last).norm() > cont * (params[i + 1] - params[i]) {
                    branches[b].breaks.push(i);
                }
            }
            branches[b].lambdas.push(lam);
        }
        positions.push(pos.clone());
        matchings.push(m);
    }
    Sweep {
        params,
        leading,
        matchings,
        branches,
        transitions,
        positions,
    }
}

/// `n` points from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_by_two_sweep_has_one_transition() {
        let grid = linspace(-1.0, 1.0, 20);
        let s = sweep(&two_by_two_family, &grid, SweepOptions { k: 2, ..Default::default() }).unwrap();
        assert_eq!(s.transitions.len(), 1);
        let t = s.transitions[0];
        assert_eq!(t.kind, CoalescenceKind::ComplexToReal);
        assert!(grid[t.step] < 0.0 && grid[t.step + 1] > 0.0);
    }

    #[test]
    fn rejects_bad_grids() {
        let o = SweepOptions::default();
        assert!(sweep(&two_by_two_family, &[], o).is_err());
        assert!(sweep(&two_by_two_family, &[0.0, 0.0], o).is_err());
        assert!(sweep(&two_by_two_family, &[1.0, 0.0], o).is_err());
    }

    #[test]
    fn zero_profile_branches_are_constant() {
        let fam = ScaledProfile::new(AlphaProfile::zero(), 1, RadialGrid::new(32).unwrap());
        let s = sweep(&fam, &linspace(0.0, 3.0, 4), SweepOptions { k: 4, continuity: Some(1e-9), im_tol: 1e-9 }).unwrap();
        for b in &s.branches {
            assert!(b.lambdas.iter().all(|z| *z == b.lambdas[0]));
            assert!(b.breaks.is_empty());
        }
        assert!(s.transitions.is_empty());
    }
}
