use std::f64::consts::PI;

use serde::Serialize;

use crate::eigen::SpectrumResult;
use crate::error::Result;
use crate::operator::{AlphaProfile, KINEMATIC_QUOTED_ANTI_DYNAMO_C};
use crate::specialfn::leading_zero_pair;

/// `π / 2^{5/4}`, the sup-norm bound below which only finitely many
/// eigenvalues can be non-real.
pub fn finiteness_bound() -> f64 {
    PI / 2f64.powf(1.25)
}

/// Relative part of the discretisation tolerance in [`im_bound_check`].
pub const IM_BOUND_REL_TOL: f64 = 1e-6;

/// Derived and quoted thresholds differing by more than this are flagged.
const THRESHOLD_AGREEMENT: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionId {
    AntiDynamo,
    ImBound,
    FinitenessNorm,
}

impl CriterionId {
    pub fn as_str(&self) -> &'static str {
        match self {
            CriterionId::AntiDynamo => "anti_dynamo",
            CriterionId::ImBound => "im_bound",
            CriterionId::FinitenessNorm => "finiteness_norm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub criterion: CriterionId,
    pub l: u32,
    pub sup_alpha: f64,
    pub sup_dalpha: f64,
    /// `j_{l-1/2,1}`.
    pub j_minus: f64,
    /// `j_{l+1/2,1}`.
    pub j_plus: f64,
    pub satisfied: bool,
    /// Positive exactly when satisfied.
    pub margin: f64,
    /// Amplitude `C` at which the criterion turns into an equality, for the
    /// profile read as `C · shape`. `None` when no finite threshold exists.
    pub threshold_c: Option<f64>,
    /// Externally quoted threshold for the same shape, when one is known.
    pub quoted_threshold_c: Option<f64>,
    /// Set when `threshold_c` and `quoted_threshold_c` disagree.
    pub inconsistent: bool,
    /// Observed `max |Im λ|` (im_bound only).
    pub observed: Option<f64>,
    /// Tolerance added to the bound (im_bound only).
    pub tolerance: Option<f64>,
}

impl CriterionReport {
    fn new(criterion: CriterionId, l: u32, profile: &AlphaProfile) -> Result<Self> {
        let (sup_alpha, sup_dalpha) = profile.sup_norms();
        let (j_minus, j_plus) = leading_zero_pair(l)?;
        Ok(Self {
            criterion,
            l,
            sup_alpha,
            sup_dalpha,
            j_minus,
            j_plus,
            satisfied: false,
            margin: 0.0,
            threshold_c: None,
            quoted_threshold_c: None,
            inconsistent: false,
            observed: None,
            tolerance: None,
        })
    }

    fn settle(mut self, margin: f64) -> Self {
        self.margin = margin;
        self.satisfied = margin > 0.0;
        self
    }
}

/// `‖α‖² + ‖α‖²‖α'‖²/j_{l-1/2,1} < j_{l+1/2,1}²`, evaluated as written.
pub fn anti_dynamo_check(profile: &AlphaProfile, l: u32) -> Result<CriterionReport> {
    let mut rep = CriterionReport::new(CriterionId::AntiDynamo, l, profile)?;
    let (a, b) = (rep.sup_alpha, rep.sup_dalpha);
    let lhs = a * a + a * a * b * b / rep.j_minus;
    let margin = rep.j_plus * rep.j_plus - lhs;

    // With a = C a1, b = C b1 the equality is a quadratic in u = C².
    let c = profile.amplitude().abs();
    if c > 0.0 {
        let (a1, b1) = (a / c, b / c);
        let qa = a1 * a1 * b1 * b1 / rep.j_minus;
        let qb = a1 * a1;
        let qc = -rep.j_plus * rep.j_plus;
        let u = if qa == 0.0 {
            (qb > 0.0).then(|| -qc / qb)
        } else {
            Some((-qb + (qb * qb - 4.0 * qa * qc).sqrt()) / (2.0 * qa))
        };
        rep.threshold_c = u.map(f64::sqrt);
    }
    if profile.is_kinematic_shape() && l == 1 {
        rep.quoted_threshold_c = Some(KINEMATIC_QUOTED_ANTI_DYNAMO_C);
        rep.inconsistent = rep
            .threshold_c
            .is_none_or(|t| (t - KINEMATIC_QUOTED_ANTI_DYNAMO_C).abs() > THRESHOLD_AGREEMENT);
    }
    Ok(rep.settle(margin))
}

/// `max |Im λ| ≤ ‖α'‖∞ + tol`, with `tol = 1e-6 ‖M‖ + truncation`.
pub fn im_bound_check(spectrum: &SpectrumResult, profile: &AlphaProfile, l: u32) -> Result<CriterionReport> {
    im_bound_check_with(spectrum, profile, l, 0.0)
}

/// As [`im_bound_check`] with an explicit truncation-error allowance, e.g.
/// the change of `max |Im λ|` under grid refinement.
pub fn im_bound_check_with(
    spectrum: &SpectrumResult,
    profile: &AlphaProfile,
    l: u32,
    truncation: f64,
) -> Result<CriterionReport> {
    let mut rep = CriterionReport::new(CriterionId::ImBound, l, profile)?;
    let tol = IM_BOUND_REL_TOL * spectrum.norm + truncation.abs();
    let observed = spectrum.max_abs_im();
    rep.observed = Some(observed);
    rep.tolerance = Some(tol);
    let margin = rep.sup_dalpha + tol - observed;
    Ok(rep.settle(if margin == 0.0 { f64::MIN_POSITIVE } else { margin }))
}

/// `‖α‖∞ < π / 2^{5/4}`.
pub fn finiteness_norm_check(profile: &AlphaProfile) -> Result<CriterionReport> {
    let mut rep = CriterionReport::new(CriterionId::FinitenessNorm, 1, profile)?;
    let bound = finiteness_bound();
    let c = profile.amplitude().abs();
    if c > 0.0 {
        let shape_sup = rep.sup_alpha / c;
        rep.threshold_c = (shape_sup > 0.0).then(|| bound / shape_sup);
    }
    let margin = bound - rep.sup_alpha;
    Ok(rep.settle(margin))
}
