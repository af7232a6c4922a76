//! Radial helicity profiles `α(r)` on `[0, 1]`.

use std::fmt;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};

/// Normalisation of the kinematic shape `1.916 (1 - 6r² + 5r⁴)`; it makes the
/// profile's peak magnitude equal to one.
pub const KINEMATIC_NORMALISATION: f64 = 1.916;

/// Threshold on `C` quoted alongside the kinematic shape for the anti-dynamo
/// inequality. Kept for side-by-side reporting only; see
/// [`crate::spectral::anti_dynamo_check`].
pub const KINEMATIC_QUOTED_ANTI_DYNAMO_C: f64 = 1.725;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum ProfileKind {
    Constant,
    /// Dense coefficients of `1, r, r², ...`.
    Polynomial { coefficients: Vec<f64> },
    /// Values and derivatives on a uniform grid covering `[0, 1]`.
    Tabulated { values: Vec<f64>, derivatives: Vec<f64> },
}

/// `α(r) = C · shape(r)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaProfile {
    kind: ProfileKind,
    amplitude: f64,
    label: Option<String>,
}

impl AlphaProfile {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: ProfileKind::Constant,
            amplitude: c,
            label: None,
        }
    }

    pub fn zero() -> Self {
        Self::constant(0.0)
    }

    /// `C Σ c_k r^k` from dense coefficients.
    pub fn polynomial(c: f64, coefficients: Vec<f64>) -> Self {
        let mut coefficients = coefficients;
        while coefficients.len() > 1 && coefficients.last() == Some(&0.0) {
            coefficients.pop();
        }
        if coefficients.is_empty() {
            coefficients.push(0.0);
        }
        Self {
            kind: ProfileKind::Polynomial { coefficients },
            amplitude: c,
            label: None,
        }
    }

    /// `C Σ c_k r^{e_k}` from explicit `(exponent, coefficient)` terms.
    pub fn from_terms(c: f64, terms: &[(u32, f64)]) -> Self {
        let degree = terms.iter().map(|t| t.0).max().unwrap_or(0) as usize;
        let mut coefficients = vec![0.0; degree + 1];
        for &(e, v) in terms {
            coefficients[e as usize] += v;
        }
        Self::polynomial(c, coefficients)
    }

    /// The kinematic profile `1.916 C (1 - 6r² + 5r⁴)`.
    pub fn kinematic(c: f64) -> Self {
        let k = KINEMATIC_NORMALISATION;
        let mut p = Self::polynomial(c, vec![k, 0.0, -6.0 * k, 0.0, 5.0 * k]);
        p.label = Some("kinematic".into());
        p
    }

    /// Tabulated profile from values on the uniform grid `r_j = j/(n-1)`.
    ///
    /// Derivatives come from second-order centred differences, one-sided at
    /// the ends.
    pub fn tabulated(c: f64, values: Vec<f64>) -> Result<Self> {
        let n = values.len();
        if n < 3 {
            return Err(Error::InvalidInput(
                "tabulated profile needs at least 3 samples".into(),
            ));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite profile sample {v}")));
        }
        let h = 1.0 / (n - 1) as f64;
        let mut derivatives = vec![0.0; n];
        derivatives[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
        derivatives[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
        for j in 1..n - 1 {
            derivatives[j] = (values[j + 1] - values[j - 1]) / (2.0 * h);
        }
        Ok(Self {
            kind: ProfileKind::Tabulated {
                values,
                derivatives,
            },
            amplitude: c,
            label: None,
        })
    }

    /// Reads a two-column `r α` text table (whitespace or comma separated,
    /// `#` comments). The radii must cover `[0, 1]` uniformly.
    pub fn from_table_file(c: f64, path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let rows = crate::io::parse_two_columns(&text, path)?;
        let n = rows.len();
        if n < 3 {
            return Err(Error::Parse {
                path: path.to_owned(),
                line: 0,
                msg: "profile table needs at least 3 rows".into(),
            });
        }
        let h = 1.0 / (n - 1) as f64;
        for (j, &(r, _)) in rows.iter().enumerate() {
            if (r - j as f64 * h).abs() > 1e-9 {
                return Err(Error::Parse {
                    path: path.to_owned(),
                    line: j + 1,
                    msg: format!("radius {r} is off the uniform grid on [0, 1] (expected {})", j as f64 * h),
                });
            }
        }
        let mut p = Self::tabulated(c, rows.into_iter().map(|(_, a)| a).collect())?;
        p.label = Some(path.display().to_string());
        Ok(p)
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    /// Same shape with a different amplitude.
    pub fn with_amplitude(&self, c: f64) -> Self {
        Self {
            amplitude: c,
            ..self.clone()
        }
    }

    /// Same shape with amplitude multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        self.with_amplitude(self.amplitude * factor)
    }

    /// Unit-amplitude shape.
    pub fn shape(&self) -> Self {
        self.with_amplitude(1.0)
    }

    pub fn is_kinematic_shape(&self) -> bool {
        self.label.as_deref() == Some("kinematic")
    }

    fn check_domain(r: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("profile evaluated at r = {r} outside [0, 1]")));
        }
        Ok(())
    }

    /// `α(r)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        Self::check_domain(r)?;
        Ok(self.eval_unchecked(r))
    }

    /// `α'(r)`.
    pub fn deriv(&self, r: f64) -> Result<f64> {
        Self::check_domain(r)?;
        Ok(self.deriv_unchecked(r))
    }

    pub(crate) fn eval_unchecked(&self, r: f64) -> f64 {
        self.amplitude
            * match &self.kind {
                ProfileKind::Constant => 1.0,
                ProfileKind::Polynomial { coefficients } => horner(coefficients, r),
                ProfileKind::Tabulated { values, .. } => interpolate(values, r),
            }
    }

    pub(crate) fn deriv_unchecked(&self, r: f64) -> f64 {
        self.amplitude
            * match &self.kind {
                ProfileKind::Constant => 0.0,
                ProfileKind::Polynomial { coefficients } => horner_deriv(coefficients, r),
                ProfileKind::Tabulated { derivatives, .. } => interpolate(derivatives, r),
            }
    }

    /// `(‖α‖∞, ‖α'‖∞)` over `[0, 1]`.
    ///
    /// Polynomials are maximised over the end points and the real critical
    /// points of `α` and `α'` in `(0, 1)`; tabulated profiles over the table.
    pub fn sup_norms(&self) -> (f64, f64) {
        let c = self.amplitude.abs();
        match &self.kind {
            ProfileKind::Constant => (c, 0.0),
            ProfileKind::Polynomial { coefficients } => {
                let d1 = derivative_coefficients(coefficients);
                let d2 = derivative_coefficients(&d1);
                (c * poly_sup(coefficients, &d1), c * poly_sup(&d1, &d2))
            }
            ProfileKind::Tabulated {
                values,
                derivatives,
            } => {
                let m = |v: &[f64]| v.iter().fold(0.0_f64, |a, b| a.max(b.abs()));
                (c * m(values), c * m(derivatives))
            }
        }
    }

    /// Pointwise sum of two profiles. Polynomial and constant profiles stay
    /// polynomial; anything involving a table is resampled on `samples` points.
    pub fn sum(&self, other: &Self, samples: usize) -> Result<Self> {
        let as_poly = |p: &Self| match &p.kind {
            ProfileKind::Constant => Some(vec![p.amplitude]),
            ProfileKind::Polynomial { coefficients } => {
                Some(coefficients.iter().map(|c| c * p.amplitude).collect())
            }
            ProfileKind::Tabulated { .. } => None,
        };
        if let (Some(a), Some(b)) = (as_poly(self), as_poly(other)) {
            let n = a.len().max(b.len());
            let coefficients = (0..n)
                .map(|k| a.get(k).copied().unwrap_or(0.0) + b.get(k).copied().unwrap_or(0.0))
                .collect();
            return Ok(Self::polynomial(1.0, coefficients));
        }
        let samples = samples.max(3);
        let values = (0..samples)
            .map(|j| {
                let r = j as f64 / (samples - 1) as f64;
                self.eval_unchecked(r) + other.eval_unchecked(r)
            })
            .collect();
        Self::tabulated(1.0, values)
    }

    /// Grammar form, e.g. `poly 6.78 0:1.916 2:-11.496 4:9.58`.
    ///
    /// Tabulated profiles have no inline form and render as `table <n>`.
    pub fn spec_string(&self) -> String {
        match &self.kind {
            ProfileKind::Constant => format!("constant {:?}", self.amplitude),
            ProfileKind::Polynomial { coefficients } => {
                if self.is_kinematic_shape() {
                    return format!("kinematic {:?}", self.amplitude);
                }
                let mut s = format!("poly {:?}", self.amplitude);
                for (e, c) in coefficients.iter().enumerate() {
                    if *c != 0.0 {
                        s.push_str(&format!(" {e}:{c:?}"));
                    }
                }
                s
            }
            ProfileKind::Tabulated { values, .. } => format!("table {}", values.len()),
        }
    }
}

impl fmt::Display for AlphaProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) if !self.is_kinematic_shape() => write!(f, "{} ({l})", self.spec_string()),
            _ => write!(f, "{}", self.spec_string()),
        }
    }
}

fn horner(c: &[f64], r: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &a| acc * r + a)
}

fn horner_deriv(c: &[f64], r: f64) -> f64 {
    c.iter()
        .enumerate()
        .skip(1)
        .rev()
        .fold(0.0, |acc, (k, &a)| acc * r + k as f64 * a)
}

fn derivative_coefficients(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(k, &a)| k as f64 * a)
        .collect()
}

/// Max of `|p|` on `[0, 1]` given `p` and `p'`.
fn poly_sup(p: &[f64], dp: &[f64]) -> f64 {
    let mut best = horner(p, 0.0).abs().max(horner(p, 1.0).abs());
    // Critical points: sign changes of p' on a fine grid, refined by bisection.
    const CELLS: usize = 4096;
    let mut a = 0.0;
    let mut fa = horner(dp, a);
    for j in 1..=CELLS {
        let b = j as f64 / CELLS as f64;
        let fb = horner(dp, b);
        if fa == 0.0 {
            best = best.max(horner(p, a).abs());
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            let (mut lo, mut hi, mut flo) = (a, b, fa);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                let fm = horner(dp, mid);
                if fm.signum() == flo.signum() {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            best = best.max(horner(p, 0.5 * (lo + hi)).abs());
        }
        a = b;
        fa = fb;
    }
    best
}

/// Linear interpolation on the uniform grid `j / (n - 1)`.
fn interpolate(table: &[f64], r: f64) -> f64 {
    let n = table.len();
    let x = r * (n - 1) as f64;
    let j = (x.floor() as usize).min(n - 2);
    let w = x - j as f64;
    table[j] * (1.0 - w) + table[j + 1] * w
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kinematic_values_at_the_ends() {
        let p = AlphaProfile::kinematic(1.0);
        assert!((p.eval(0.0).unwrap() - 1.916).abs() < 1e-14);
        assert!((p.deriv(1.0).unwrap() - 15.328).abs() < 1e-12);
        assert!(p.eval(1.0).unwrap().abs() < 1e-14);
    }

    #[test]
    fn constant_profile() {
        let p = AlphaProfile::constant(3.0);
        assert_eq!(p.eval(0.37).unwrap(), 3.0);
        assert_eq!(p.deriv(0.37).unwrap(), 0.0);
        assert_eq!(p.sup_norms(), (3.0, 0.0));
    }

    #[test]
    fn out_of_domain() {
        let p = AlphaProfile::kinematic(1.0);
        assert!(matches!(p.eval(1.5), Err(Error::Domain(_))));
        assert!(matches!(p.deriv(-0.1), Err(Error::Domain(_))));
    }

    #[test]
    fn sup_norms_match_calculus() {
        let (a, da) = AlphaProfile::kinematic(1.0).sup_norms();
        assert!((a - 1.916).abs() < 1e-12);
        assert!((da - 15.328).abs() < 1e-12);

        let (a, da) = AlphaProfile::from_terms(1.0, &[(2, 1.0)]).sup_norms();
        assert!((a - 1.0).abs() < 1e-14 && (da - 2.0).abs() < 1e-14);

        // r(1-r)^2 peaks at r = 1/3 with value 4/27; derivative peaks at r=0 with 1.
        let p = AlphaProfile::polynomial(1.0, vec![0.0, 1.0, -2.0, 1.0]);
        let (a, da) = p.sup_norms();
        assert!((a - 4.0 / 27.0).abs() < 1e-9);
        assert!((da - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interior_extremum_of_derivative() {
        // α = sin-like cubic 3r - 4r^3: α' = 3 - 12r^2, extremes at ends (3, -9)
        let p = AlphaProfile::polynomial(2.0, vec![0.0, 3.0, 0.0, -4.0]);
        let (a, da) = p.sup_norms();
        // |α| max at r = 1/2 (value 1) -> 2
        assert!((a - 2.0).abs() < 1e-9, "{a}");
        assert!((da - 18.0).abs() < 1e-12);
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let values: Vec<f64> = (0..11).map(|j| (j as f64 / 10.0).powi(2)).collect();
        let p = AlphaProfile::tabulated(2.0, values).unwrap();
        assert!((p.eval(0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!((p.eval(0.55).unwrap() - 2.0 * 0.305).abs() < 1e-14);
        // centred differences of r^2 are exact in the interior
        assert!((p.deriv(0.5).unwrap() - 2.0).abs() < 1e-12);
        let (a, da) = p.sup_norms();
        assert!((a - 2.0).abs() < 1e-14 && (da - 4.0).abs() < 1e-12);
    }

    #[test]
    fn sum_of_polynomials_is_exact() {
        let a = AlphaProfile::kinematic(2.0);
        let b = AlphaProfile::constant(0.5);
        let s = a.sum(&b, 0).unwrap();
        for r in [0.0, 0.3, 0.9, 1.0] {
            let want = a.eval(r).unwrap() + 0.5;
            assert!((s.eval(r).unwrap() - want).abs() < 1e-13);
        }
    }
}
