use serde::Serialize;

use super::noise::NoiseDistribution;
use crate::error::{Error, Result};
use crate::operator::{AlphaProfile, MIN_NODES};

/// Time integrator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeScheme {
    /// Second-order semi-implicit BDF: diffusion implicit, α terms
    /// extrapolated. The first step is Crank–Nicolson with a Heun corrector.
    #[default]
    Imex,
    /// Fully explicit third-order Adams–Bashforth; needs `dt = O(h²)`.
    ExplicitAb3,
}

impl TimeScheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            TimeScheme::Imex => "imex",
            TimeScheme::ExplicitAb3 => "ab3",
        }
    }
}

impl std::str::FromStr for TimeScheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "imex" => Ok(Self::Imex),
            "ab3" => Ok(Self::ExplicitAb3),
            _ => Err(format!("unknown time scheme `{s}` (imex|ab3)")),
        }
    }
}

/// Starting field.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialField {
    /// `s₁ = amplitude · r (1 - r) · shape(r)`, `t₁ = 0`.
    Seed { amplitude: f64 },
    /// Lowest poloidal free-decay mode `s₁ = amplitude · j₁(πr)` (spherical
    /// Bessel function), `t₁ = 0`; decays like `exp(-π² t)`.
    FreeDecay { amplitude: f64 },
    /// Nodal values of `s₁` and `t₁` at `r_1..=r_N`.
    Nodal { s: Vec<f64>, t: Vec<f64> },
}

impl Default for InitialField {
    fn default() -> Self {
        InitialField::Seed { amplitude: 1e-4 }
    }
}

/// Stability constant for the IMEX scheme: `dt · max|α|² ≤ IMEX_STABILITY`.
pub const IMEX_STABILITY: f64 = 1.0;
/// Stability constant for explicit AB3: `dt ≤ AB3_STABILITY · h²`.
pub const AB3_STABILITY: f64 = 0.12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    /// Amplitude `C` of the kinematic shape.
    pub c: f64,
    /// Noise amplitude `D`.
    pub d: f64,
    pub tau_corr: f64,
    pub e0_mag: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub record_stride: usize,
    /// Unit-amplitude shape multiplied by `c`.
    pub shape: AlphaProfile,
    /// When false, `α = C·shape + Ξ` regardless of the field.
    pub quench: bool,
    pub scheme: TimeScheme,
    pub noise: NoiseDistribution,
    pub initial: InitialField,
    /// Times at which the quenched α profile is captured.
    pub snapshot_times: Vec<f64>,
    /// Trailing fraction of the run over which α is averaged for export.
    pub saturated_fraction: f64,
    /// Abort once any field value exceeds this.
    pub blowup: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            c: 6.8,
            d: 0.0,
            tau_corr: 0.02,
            e0_mag: 100.0,
            n: 100,
            dt: 1e-4,
            t_end: 10.0,
            seed: 0,
            record_stride: 10,
            shape: AlphaProfile::kinematic(1.0),
            quench: true,
            scheme: TimeScheme::Imex,
            noise: NoiseDistribution::Gaussian,
            initial: InitialField::default(),
            snapshot_times: Vec::new(),
            saturated_fraction: 0.25,
            blowup: 1e12,
        }
    }
}

impl SimConfig {
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    pub fn steps(&self) -> u64 {
        (self.t_end / self.dt).round() as u64
    }

    /// Bound on `|α|` used by the stability check: the unquenched profile
    /// plus two standard deviations of the noise polynomial at `r = 1`.
    pub fn alpha_bound(&self) -> f64 {
        let (sup, _) = self.shape.sup_norms();
        self.c.abs() * sup + 4.0 * self.d.abs()
    }

    /// Largest admissible time step for the configured scheme.
    pub fn max_stable_dt(&self) -> f64 {
        let a = self.alpha_bound();
        let alpha_limit = if a > 0.0 { IMEX_STABILITY / (a * a) } else { f64::INFINITY };
        match self.scheme {
            TimeScheme::Imex => alpha_limit,
            TimeScheme::ExplicitAb3 => {
                let h = self.h();
                (AB3_STABILITY * h * h).min(alpha_limit).min(0.5 * h / a.max(f64::MIN_POSITIVE))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.n < MIN_NODES {
            return bad(format!("n must be >= {MIN_NODES}, got {}", self.n));
        }
        for (name, v) in [
            ("c", self.c),
            ("d", self.d),
            ("tau_corr", self.tau_corr),
            ("e0_mag", self.e0_mag),
            ("dt", self.dt),
            ("t_end", self.t_end),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite"));
            }
        }
        if self.dt <= 0.0 {
            return bad(format!("dt must be positive, got {}", self.dt));
        }
        if self.t_end < 0.0 {
            return bad(format!("t_end must be non-negative, got {}", self.t_end));
        }
        if self.tau_corr <= 0.0 {
            return bad(format!("tau_corr must be positive, got {}", self.tau_corr));
        }
        if self.e0_mag <= 0.0 {
            return bad(format!("e0_mag must be positive, got {}", self.e0_mag));
        }
        if self.record_stride == 0 {
            return bad("record_stride must be at least 1".into());
        }
        if !(self.saturated_fraction > 0.0 && self.saturated_fraction <= 1.0) {
            return bad(format!("saturated_fraction must be in (0, 1], got {}", self.saturated_fraction));
        }
        let limit = self.max_stable_dt();
        if self.dt > limit {
            return bad(format!(
                "dt = {} exceeds the {} stability limit {limit:.3e}",
                self.dt,
                self.scheme.as_str()
            ));
        }
        if let InitialField::Nodal { s, t } = &self.initial {
            if s.len() != self.n || t.len() != self.n {
                return bad(format!("nodal initial field needs {} values per component", self.n));
            }
        }
        Ok(())
    }
}
