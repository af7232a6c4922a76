//! Helicity profiles and the finite-difference dynamo operator.
//!
//! For a degree `l` and `y₁ = r s_l`, `y₂ = r t_l` the operator reads
//!
//! ```text
//! | ∂² - l(l+1)/r²                     α(r)           | (y₁)
//! | -∂ α(r) ∂ + α(r) l(l+1)/r²         ∂² - l(l+1)/r² | (y₂)
//! ```
//!
//! with `y₁'(1) + l y₁(1) = 0`, `y₂(1) = 0` and regularity at the origin.
//! Unknowns are `y₁` at `r_1..=r_N` followed by `y₂` at `r_1..=r_{N-1}`
//! (the Dirichlet value `y₂(1) = 0` is eliminated), so the matrix has
//! dimension `2N - 1`.

mod grid;
mod profile;

pub use grid::{RadialGrid, MIN_NODES};
pub use profile::{
    AlphaProfile, ProfileKind, KINEMATIC_NORMALISATION, KINEMATIC_QUOTED_ANTI_DYNAMO_C,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;

/// How the `-∂ α ∂` part of the lower-left block is discretised.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AssemblyScheme {
    /// Conservative form with `α` sampled at half nodes.
    #[default]
    Flux,
    /// `α τ_l y - α' y'` with centred first differences. Used as a
    /// consistency check of the flux form.
    Expansion,
}

#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    l: u32,
    grid: RadialGrid,
    scheme: AssemblyScheme,
    profile: AlphaProfile,
    matrix: DenseMatrix,
}

impl OperatorMatrix {
    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn grid(&self) -> RadialGrid {
        self.grid
    }

    pub fn scheme(&self) -> AssemblyScheme {
        self.scheme
    }

    pub fn profile(&self) -> &AlphaProfile {
        &self.profile
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Row/column of `y₁(r_i)`, `i` in `1..=N`.
    pub fn y1_index(&self, i: usize) -> usize {
        poloidal_index(i)
    }

    /// Row/column of `y₂(r_i)`, `i` in `1..N`.
    pub fn y2_index(&self, i: usize) -> usize {
        toroidal_index(self.grid.n(), i)
    }

    /// Stacks nodal values of `(y₁, y₂)` given as functions of `r` into the
    /// unknown vector.
    pub fn stack<F, G>(&self, y1: F, y2: G) -> Vec<f64>
    where
        F: Fn(f64) -> f64,
        G: Fn(f64) -> f64,
    {
        let n = self.grid.n();
        let mut v = Vec::with_capacity(2 * n - 1);
        v.extend((1..=n).map(|i| y1(self.grid.node(i))));
        v.extend((1..n).map(|i| y2(self.grid.node(i))));
        v
    }
}

#[inline]
fn poloidal_index(i: usize) -> usize {
    i - 1
}

#[inline]
fn toroidal_index(n: usize, i: usize) -> usize {
    n + i - 1
}

/// Assembles the conservative (flux-form) operator.
pub fn assemble(l: u32, profile: &AlphaProfile, grid: RadialGrid) -> Result<OperatorMatrix> {
    assemble_with(l, profile, grid, AssemblyScheme::Flux)
}

pub fn assemble_with(
    l: u32,
    profile: &AlphaProfile,
    grid: RadialGrid,
    scheme: AssemblyScheme,
) -> Result<OperatorMatrix> {
    if l == 0 {
        return Err(Error::InvalidInput("degree l must be >= 1".into()));
    }
    let n = grid.n();
    let h = grid.h();
    let ih2 = 1.0 / (h * h);
    let ll = (l * (l + 1)) as f64;
    let lf = l as f64;

    let alpha_nodes: Vec<f64> = (0..=n).map(|i| profile.eval_unchecked(grid.node(i))).collect();
    let dalpha_nodes: Vec<f64> = (0..=n).map(|i| profile.deriv_unchecked(grid.node(i))).collect();
    let alpha_half: Vec<f64> = (0..n).map(|i| profile.eval_unchecked(grid.half_node(i))).collect();
    if let Some(bad) = alpha_nodes
        .iter()
        .chain(&dalpha_nodes)
        .chain(&alpha_half)
        .find(|v| !v.is_finite())
    {
        return Err(Error::InvalidInput(format!(
            "profile {profile} is not evaluable on the grid (got {bad})"
        )));
    }

    let dim = 2 * n - 1;
    let mut m = DenseMatrix::zeros(dim, dim);
    let p = poloidal_index;
    let t = |i| toroidal_index(n, i);

    // Poloidal rows.
    for i in 1..=n {
        let r = grid.node(i);
        let row = p(i);
        m[(row, row)] = -2.0 * ih2 - ll / (r * r);
        if i > 1 {
            m[(row, p(i - 1))] = ih2;
        }
        if i < n {
            m[(row, p(i + 1))] = ih2;
            m[(row, t(i))] = alpha_nodes[i];
        } else {
            // ghost value y_{N+1} = y_{N-1} - 2 h l y_N from the centred
            // form of y' + l y = 0
            m[(row, p(n - 1))] += ih2;
            m[(row, row)] -= 2.0 * lf / h;
        }
    }

    // Toroidal rows.
    for i in 1..n {
        let r = grid.node(i);
        let row = t(i);
        m[(row, row)] = -2.0 * ih2 - ll / (r * r);
        if i > 1 {
            m[(row, t(i - 1))] = ih2;
        }
        if i + 1 < n {
            m[(row, t(i + 1))] = ih2;
        }

        let centre = alpha_nodes[i] * ll / (r * r);
        let (below, diag, above) = match scheme {
            AssemblyScheme::Flux => {
                let (am, ap) = (alpha_half[i - 1], alpha_half[i]);
                (-am * ih2, (am + ap) * ih2 + centre, -ap * ih2)
            }
            AssemblyScheme::Expansion => {
                let (a, da) = (alpha_nodes[i], dalpha_nodes[i]);
                let first = da / (2.0 * h);
                (-a * ih2 + first, 2.0 * a * ih2 + centre, -a * ih2 - first)
            }
        };
        if i > 1 {
            m[(row, p(i - 1))] = below;
        }
        m[(row, p(i))] = diag;
        m[(row, p(i + 1))] = above;
    }

    Ok(OperatorMatrix {
        l,
        grid,
        scheme,
        profile: profile.clone(),
        matrix: m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> RadialGrid {
        RadialGrid::new(n).unwrap()
    }

    #[test]
    fn rejects_coarse_grids_and_zero_degree() {
        assert!(RadialGrid::new(8).is_err());
        assert!(assemble(0, &AlphaProfile::zero(), grid(16)).is_err());
    }

    #[test]
    fn zero_alpha_decouples() {
        let op = assemble(2, &AlphaProfile::zero(), grid(32)).unwrap();
        let n = 32;
        let m = op.matrix();
        for i in 1..=n {
            for j in 1..n {
                assert_eq!(m[(op.y1_index(i), op.y2_index(j))], 0.0);
                assert_eq!(m[(op.y2_index(j), op.y1_index(i))], 0.0);
            }
        }
        // interior of both diagonal blocks is symmetric tridiagonal
        for i in 1..n - 1 {
            let (a, b) = (op.y1_index(i), op.y1_index(i + 1));
            assert_eq!(m[(a, b)], m[(b, a)]);
            let (a, b) = (op.y2_index(i), op.y2_index(i + 1));
            assert_eq!(m[(a, b)], m[(b, a)]);
        }
    }

    #[test]
    fn robin_row_exact_for_quadratics() {
        // y = r^2 + b r with y'(1) + l y(1) = 0
        for l in 1..=3u32 {
            let lf = l as f64;
            let b = -(2.0 + lf) / (1.0 + lf);
            let y = move |r: f64| r * r + b * r;
            let op = assemble(l, &AlphaProfile::zero(), grid(40)).unwrap();
            let v = op.stack(y, |_| 0.0);
            let out = op.matrix().matvec(&v);
            let want = 2.0 - (l * (l + 1)) as f64 * y(1.0);
            let got = out[op.y1_index(40)];
            assert!((got - want).abs() < 1e-8 * want.abs().max(1.0), "l={l}: {got} vs {want}");
        }
    }

    #[test]
    fn dimension_and_finiteness() {
        let op = assemble(1, &AlphaProfile::kinematic(6.78), grid(64)).unwrap();
        assert_eq!(op.dim(), 127);
        assert!(op.matrix().find_non_finite().is_none());
    }
}
