use serde::Serialize;

use super::config::{InitialField, SimConfig, TimeScheme};
use super::noise::{eval_xi, NoiseState};
use super::tridiag::Tridiagonal;
use crate::error::{Error, Result};
use crate::operator::AlphaProfile;
use crate::specialfn::{bessel_j, BesselOrder};

/// Degree evolved by the simulator (the dipole).
pub const DEGREE: u32 = 1;
const LL: f64 = (DEGREE * (DEGREE + 1)) as f64;

/// Radial fields in the form `y₁ = r s₁`, `y₂ = r t₁`.
///
/// `y1` holds nodes `0..=N` plus the Robin ghost value at index `N + 1`;
/// `y2` holds nodes `0..=N` with `y2[0] = y2[N] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub(crate) t: f64,
    pub(crate) step: u64,
    pub(crate) y1: Vec<f64>,
    pub(crate) y2: Vec<f64>,
    pub(crate) noise: NoiseState,
    /// Multistep memory, interior nodes only. Explicit AB3 keeps the two
    /// previous right-hand sides (most recent first); the IMEX scheme keeps
    /// the previous α terms followed by the previous field.
    pub(crate) history: Vec<(Vec<f64>, Vec<f64>)>,
}

impl SimState {
    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn step(&self) -> u64 {
        self.step
    }

    pub fn n(&self) -> usize {
        self.y2.len() - 1
    }

    pub fn h(&self) -> f64 {
        1.0 / self.n() as f64
    }

    pub fn noise(&self) -> &NoiseState {
        &self.noise
    }

    /// `r s₁` at nodes `0..=N`.
    pub fn y1(&self) -> &[f64] {
        &self.y1[..=self.n()]
    }

    /// `r t₁` at nodes `0..=N`.
    pub fn y2(&self) -> &[f64] {
        &self.y2
    }

    /// `s₁(r_i)` for `i = 1..=N`.
    pub fn s(&self) -> Vec<f64> {
        let h = self.h();
        (1..=self.n()).map(|i| self.y1[i] / (i as f64 * h)).collect()
    }

    /// `t₁(r_i)` for `i = 1..=N`.
    pub fn toroidal(&self) -> Vec<f64> {
        let h = self.h();
        (1..=self.n()).map(|i| self.y2[i] / (i as f64 * h)).collect()
    }

    /// Dipole proxy `s₁(1, t)`.
    pub fn dipole(&self) -> f64 {
        self.y1[self.n()]
    }

    /// `t₁(1/2, t)`, linearly interpolated when `r = 1/2` is not a node.
    pub fn toroidal_mid(&self) -> f64 {
        let n = self.n();
        let x = 0.5 * n as f64;
        let i = x.floor() as usize;
        let w = x - i as f64;
        let y = if w == 0.0 {
            self.y2[i]
        } else {
            (1.0 - w) * self.y2[i] + w * self.y2[i + 1]
        };
        y / 0.5
    }

    pub fn max_abs(&self) -> f64 {
        self.y1
            .iter()
            .chain(&self.y2)
            .fold(0.0_f64, |m, v| if v.is_nan() { f64::NAN } else { m.max(v.abs()) })
    }

    /// `(|∂_r s₁(1) + 2 s₁(1)|, |t₁(1)|)` with the derivative taken through
    /// the ghost node.
    pub fn boundary_residuals(&self) -> (f64, f64) {
        let n = self.n();
        let h = self.h();
        // s' + 2s at r = 1 equals y₁' + y₁ there
        let dy = (self.y1[n + 1] - self.y1[n - 1]) / (2.0 * h);
        ((dy + DEGREE as f64 * self.y1[n]).abs(), self.y2[n].abs())
    }

    /// Total magnetic energy `∫₀¹ E_mag r² dr` (trapezoidal rule).
    pub fn total_energy(&self) -> f64 {
        let n = self.n();
        let h = self.h();
        let mut sum = 0.0;
        for i in 1..=n {
            let r = i as f64 * h;
            let w = if i == n { 0.5 } else { 1.0 };
            sum += w * energy_density(self, i) * r * r;
        }
        sum * h
    }
}

/// `E_mag(r_i) = 2 s₁²/r² + (∂_r(r s₁))²/r² + t₁²` at node `i ≥ 1`, centred
/// differences inside and a second-order one-sided difference at `r = 1`.
pub fn energy_density(state: &SimState, i: usize) -> f64 {
    let n = state.n();
    let h = state.h();
    let y = &state.y1;
    let r = i as f64 * h;
    let dy = if i < n {
        (y[i + 1] - y[i - 1]) / (2.0 * h)
    } else {
        (3.0 * y[n] - 4.0 * y[n - 1] + y[n - 2]) / (2.0 * h)
    };
    let r2 = r * r;
    (2.0 * y[i] * y[i] / r2 + dy * dy + state.y2[i] * state.y2[i]) / r2
}

/// `E_mag` at the half node `r_{i+1/2}`, from averages and one-sided
/// differences of the neighbouring nodes.
fn energy_density_half(y1: &[f64], y2: &[f64], h: f64, i: usize) -> f64 {
    let r = (i as f64 + 0.5) * h;
    let r2 = r * r;
    let a = 0.5 * (y1[i] + y1[i + 1]);
    let dy = (y1[i + 1] - y1[i]) / h;
    let b = 0.5 * (y2[i] + y2[i + 1]);
    (2.0 * a * a / r2 + dy * dy + b * b) / r2
}

/// `C shape(r)/(1 + E/E₀) + Ξ(r)` at node `i` (`i = 0` uses an extrapolated
/// energy).
pub fn quenched_alpha(state: &SimState, config: &SimConfig, i: usize) -> f64 {
    let r = i as f64 * state.h();
    let e = if i == 0 {
        origin_energy(state)
    } else {
        energy_density(state, i)
    };
    let kin = config.c * config.shape.eval_unchecked(r);
    let base = if config.quench { kin / (1.0 + e / config.e0_mag) } else { kin };
    base + state.noise.eval(r)
}

fn origin_energy(state: &SimState) -> f64 {
    let (e1, e2, e3) = (energy_density(state, 1), energy_density(state, 2), energy_density(state, 3));
    (3.0 * e1 - 3.0 * e2 + e3).max(0.0)
}

/// Captured α profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaSnapshot {
    pub t: f64,
    /// `r_0..=r_N`.
    pub r: Vec<f64>,
    pub alpha: Vec<f64>,
}

/// Recorded diagnostics, in diffusion-time units.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct TimeSeries {
    pub t: Vec<f64>,
    /// `s₁(1, t)`.
    pub dipole: Vec<f64>,
    /// `t₁(1/2, t)`.
    pub toroidal_mid: Vec<f64>,
    /// `∫ E_mag r² dr`.
    pub energy: Vec<f64>,
    pub snapshots: Vec<AlphaSnapshot>,
    /// Time-averaged quenched α over the trailing window, at `r_0..=r_N`.
    pub saturated_alpha: Option<Vec<f64>>,
}

impl TimeSeries {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Sampling interval (uniform by construction).
    pub fn dt(&self) -> f64 {
        if self.t.len() < 2 {
            0.0
        } else {
            self.t[1] - self.t[0]
        }
    }

    /// The time-averaged saturated α as a unit-amplitude tabulated profile.
    pub fn saturated_profile(&self) -> Result<AlphaProfile> {
        let values = self
            .saturated_alpha
            .clone()
            .ok_or_else(|| Error::InvalidInput("run recorded no saturated α average".into()))?;
        Ok(AlphaProfile::tabulated(1.0, values)?.with_label("saturated"))
    }
}

/// A running simulation.
#[derive(Debug, Clone)]
pub struct Simulation {
    config: SimConfig,
    state: SimState,
    h: f64,
    kin_nodes: Vec<f64>,
    kin_half: Vec<f64>,
    r_nodes: Vec<f64>,
    r_half: Vec<f64>,
    // implicit diffusion operators (rows 1..=N for y1, 1..N for y2)
    a1: (Vec<f64>, Vec<f64>, Vec<f64>),
    a2: (Vec<f64>, Vec<f64>, Vec<f64>),
    lhs1: Tridiagonal,
    lhs2: Tridiagonal,
    bdf1: Tridiagonal,
    bdf2: Tridiagonal,
    alpha_nodes: Vec<f64>,
    alpha_half: Vec<f64>,
    series: TimeSeries,
    next_snapshot: usize,
    sat_sum: Vec<f64>,
    sat_count: u64,
}

fn diffusion_operator(n: usize, h: f64, robin: bool) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let m = if robin { n } else { n - 1 };
    let ih2 = 1.0 / (h * h);
    let mut lower = vec![ih2; m];
    let mut upper = vec![ih2; m];
    let mut diag = vec![0.0; m];
    for k in 0..m {
        let r = (k + 1) as f64 * h;
        diag[k] = -2.0 * ih2 - LL / (r * r);
    }
    lower[0] = 0.0;
    upper[m - 1] = 0.0;
    if robin {
        lower[m - 1] = 2.0 * ih2;
        diag[m - 1] -= 2.0 * DEGREE as f64 / h;
    }
    (lower, diag, upper)
}

fn apply_tridiag(a: &(Vec<f64>, Vec<f64>, Vec<f64>), x: &[f64], out: &mut [f64]) {
    let (lo, d, up) = a;
    let m = d.len();
    for k in 0..m {
        let mut v = d[k] * x[k];
        if k > 0 {
            v += lo[k] * x[k - 1];
        }
        if k + 1 < m {
            v += up[k] * x[k + 1];
        }
        out[k] = v;
    }
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        let h = config.h();
        let mut y1 = vec![0.0; n + 2];
        let mut y2 = vec![0.0; n + 1];
        match &config.initial {
            InitialField::Seed { amplitude } => {
                for (i, y) in y1.iter_mut().enumerate().take(n + 1) {
                    let r = i as f64 * h;
                    *y = r * amplitude * r * (1.0 - r) * config.shape.eval_unchecked(r);
                }
            }
            InitialField::FreeDecay { amplitude } => {
                let order = BesselOrder::plus(DEGREE)?;
                for (i, y) in y1.iter_mut().enumerate().take(n + 1).skip(1) {
                    let r = i as f64 * h;
                    // j₁(x) = √(π / 2x) J_{3/2}(x)
                    let x = std::f64::consts::PI * r;
                    let j1 = (std::f64::consts::PI / (2.0 * x)).sqrt() * bessel_j(order, x)?;
                    *y = r * amplitude * j1;
                }
            }
            InitialField::Nodal { s, t } => {
                for i in 1..=n {
                    let r = i as f64 * h;
                    y1[i] = r * s[i - 1];
                    if i < n {
                        y2[i] = r * t[i - 1];
                    }
                }
            }
        }
        y1[n + 1] = y1[n - 1] - 2.0 * h * DEGREE as f64 * y1[n];
        let noise = NoiseState::new(config.d, config.tau_corr, config.noise, config.seed);
        let state = SimState {
            t: 0.0,
            step: 0,
            y1,
            y2,
            noise,
            history: Vec::new(),
        };
        Self::with_state(config, state)
    }

    pub(crate) fn with_state(config: SimConfig, state: SimState) -> Result<Self> {
        config.validate()?;
        let n = config.n;
        if state.n() != n {
            return Err(Error::InvalidInput(format!("state has N = {}, config N = {n}", state.n())));
        }
        let h = config.h();
        let r_nodes: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();
        let r_half: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h).collect();
        let kin_nodes = r_nodes.iter().map(|&r| config.c * config.shape.eval_unchecked(r)).collect();
        let kin_half = r_half.iter().map(|&r| config.c * config.shape.eval_unchecked(r)).collect();
        let a1 = diffusion_operator(n, h, true);
        let a2 = diffusion_operator(n, h, false);
        let lhs = |a: &(Vec<f64>, Vec<f64>, Vec<f64>)| {
            let s = -0.5 * config.dt;
            let lo: Vec<f64> = a.0.iter().map(|v| s * v).collect();
            let up: Vec<f64> = a.2.iter().map(|v| s * v).collect();
            let d: Vec<f64> = a.1.iter().map(|v| 1.0 + s * v).collect();
            Tridiagonal::factor(&lo, &d, &up)
        };
        let (lhs1, lhs2) = (lhs(&a1), lhs(&a2));
        let bdf = |a: &(Vec<f64>, Vec<f64>, Vec<f64>)| {
            let s = -2.0 * config.dt;
            let lo: Vec<f64> = a.0.iter().map(|v| s * v).collect();
            let up: Vec<f64> = a.2.iter().map(|v| s * v).collect();
            let d: Vec<f64> = a.1.iter().map(|v| 3.0 + s * v).collect();
            Tridiagonal::factor(&lo, &d, &up)
        };
        let (bdf1, bdf2) = (bdf(&a1), bdf(&a2));
        let mut sim = Self {
            h,
            kin_nodes,
            kin_half,
            r_nodes,
            r_half,
            a1,
            a2,
            lhs1,
            lhs2,
            bdf1,
            bdf2,
            alpha_nodes: vec![0.0; n + 1],
            alpha_half: vec![0.0; n],
            series: TimeSeries::default(),
            next_snapshot: 0,
            sat_sum: vec![0.0; n + 1],
            sat_count: 0,
            config,
            state,
        };
        sim.next_snapshot = sim
            .config
            .snapshot_times
            .iter()
            .take_while(|&&ts| ts < sim.state.t)
            .count();
        sim.refresh_alpha();
        sim.record();
        Ok(sim)
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn series(&self) -> &TimeSeries {
        &self.series
    }

    /// Quenched α at nodes `r_0..=r_N` for the current state.
    pub fn alpha_nodes(&self) -> &[f64] {
        &self.alpha_nodes
    }

    fn refresh_alpha(&mut self) {
        let xi = self.state.noise.advance_to(self.state.t);
        compute_alpha(
            &self.config,
            &self.state,
            &self.kin_nodes,
            &self.kin_half,
            &self.r_nodes,
            &self.r_half,
            &xi,
            &mut self.alpha_nodes,
            &mut self.alpha_half,
        );
    }

    /// Explicit (α) terms for fields `y1`, `y2` with the current α buffers.
    fn alpha_terms(&self, y1: &[f64], y2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.config.n;
        let ih2 = 1.0 / (self.h * self.h);
        let mut f1 = vec![0.0; n];
        let mut f2 = vec![0.0; n - 1];
        for i in 1..=n {
            f1[i - 1] = self.alpha_nodes[i] * y2[i];
        }
        let ah = &self.alpha_half;
        for i in 1..n {
            let r = self.r_nodes[i];
            let flux = ah[i] * (y1[i + 1] - y1[i]) - ah[i - 1] * (y1[i] - y1[i - 1]);
            f2[i - 1] = -flux * ih2 + self.alpha_nodes[i] * LL / (r * r) * y1[i];
        }
        (f1, f2)
    }

    fn full_rhs(&self, y1: &[f64], y2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (mut f1, mut f2) = self.alpha_terms(y1, y2);
        let n = self.config.n;
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n - 1];
        apply_tridiag(&self.a1, &y1[1..=n], &mut d1);
        apply_tridiag(&self.a2, &y2[1..n], &mut d2);
        for (f, d) in f1.iter_mut().zip(&d1) {
            *f += d;
        }
        for (f, d) in f2.iter_mut().zip(&d2) {
            *f += d;
        }
        (f1, f2)
    }

    /// Crank–Nicolson step of the diffusion with explicit forcing `(g1, g2)`.
    fn cn_solve(&self, g1: &[f64], g2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.config.n;
        let dt = self.config.dt;
        let y1 = &self.state.y1;
        let y2 = &self.state.y2;
        let mut b1 = vec![0.0; n];
        let mut b2 = vec![0.0; n - 1];
        apply_tridiag(&self.a1, &y1[1..=n], &mut b1);
        apply_tridiag(&self.a2, &y2[1..n], &mut b2);
        for k in 0..n {
            b1[k] = y1[k + 1] + 0.5 * dt * b1[k] + dt * g1[k];
        }
        for k in 0..n - 1 {
            b2[k] = y2[k + 1] + 0.5 * dt * b2[k] + dt * g2[k];
        }
        self.lhs1.solve(&mut b1);
        self.lhs2.solve(&mut b2);
        (b1, b2)
    }

    fn embed(&self, v1: &[f64], v2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let n = self.config.n;
        let mut y1 = vec![0.0; n + 2];
        let mut y2 = vec![0.0; n + 1];
        y1[1..=n].copy_from_slice(v1);
        y2[1..n].copy_from_slice(v2);
        y1[n + 1] = y1[n - 1] - 2.0 * self.h * DEGREE as f64 * y1[n];
        (y1, y2)
    }

    /// α and right-hand side evaluated at a trial state at time `t`.
    fn alpha_terms_at(&mut self, y1: Vec<f64>, y2: Vec<f64>, t: f64, full: bool) -> (Vec<f64>, Vec<f64>) {
        let trial = SimState {
            t,
            step: self.state.step,
            y1,
            y2,
            noise: self.state.noise.clone(),
            history: Vec::new(),
        };
        let saved = std::mem::replace(&mut self.state, trial);
        self.refresh_alpha();
        let out = if full {
            self.full_rhs(&self.state.y1, &self.state.y2)
        } else {
            self.alpha_terms(&self.state.y1, &self.state.y2)
        };
        let trial_noise = self.state.noise.clone();
        self.state = saved;
        // the trial already consumed draws up to t; keep them so the stream
        // stays sequential
        self.state.noise = trial_noise;
        out
    }

    /// Advances one time step.
    pub fn step(&mut self) -> Result<()> {
        let dt = self.config.dt;
        let t_next = (self.state.step + 1) as f64 * dt;
        let (ny1, ny2) = match self.config.scheme {
            TimeScheme::Imex => {
                let n = self.config.n;
                let (f1, f2) = self.alpha_terms(&self.state.y1, &self.state.y2);
                let (v1, v2) = if self.state.history.len() == 2 {
                    // SBDF2: (3y⁺ - 4y + y⁻)/(2dt) = A y⁺ + 2f - f⁻
                    let (p1, p2) = &self.state.history[0];
                    let (q1, q2) = &self.state.history[1];
                    let y1 = &self.state.y1;
                    let y2 = &self.state.y2;
                    let mut b1: Vec<f64> =
                        (0..n).map(|k| 4.0 * y1[k + 1] - q1[k] + 2.0 * dt * (2.0 * f1[k] - p1[k])).collect();
                    let mut b2: Vec<f64> =
                        (0..n - 1).map(|k| 4.0 * y2[k + 1] - q2[k] + 2.0 * dt * (2.0 * f2[k] - p2[k])).collect();
                    self.bdf1.solve(&mut b1);
                    self.bdf2.solve(&mut b2);
                    (b1, b2)
                } else {
                    // start-up: Crank–Nicolson with a Heun corrector for the α terms
                    let (p1, p2) = self.cn_solve(&f1, &f2);
                    let (q1, q2) = self.embed(&p1, &p2);
                    let (fs1, fs2) = self.alpha_terms_at(q1, q2, t_next, false);
                    let g1: Vec<f64> = f1.iter().zip(&fs1).map(|(a, b)| 0.5 * (a + b)).collect();
                    let g2: Vec<f64> = f2.iter().zip(&fs2).map(|(a, b)| 0.5 * (a + b)).collect();
                    self.cn_solve(&g1, &g2)
                };
                let prev = (self.state.y1[1..=n].to_vec(), self.state.y2[1..n].to_vec());
                self.state.history = vec![(f1, f2), prev];
                self.embed(&v1, &v2)
            }
            TimeScheme::ExplicitAb3 => {
                let (g1, g2) = self.full_rhs(&self.state.y1, &self.state.y2);
                let n = self.config.n;
                let y1 = &self.state.y1;
                let y2 = &self.state.y2;
                let (v1, v2): (Vec<f64>, Vec<f64>) = if self.state.history.len() >= 2 {
                    let (a1, a2) = &self.state.history[0];
                    let (b1, b2) = &self.state.history[1];
                    let c = |k: usize, g: &[f64], a: &[f64], b: &[f64], y: f64| {
                        y + dt * (23.0 * g[k] - 16.0 * a[k] + 5.0 * b[k]) / 12.0
                    };
                    (
                        (0..n).map(|k| c(k, &g1, a1, b1, y1[k + 1])).collect(),
                        (0..n - 1).map(|k| c(k, &g2, a2, b2, y2[k + 1])).collect(),
                    )
                } else {
                    // Heun (explicit RK2) for the two start-up steps
                    let p1: Vec<f64> = (0..n).map(|k| y1[k + 1] + dt * g1[k]).collect();
                    let p2: Vec<f64> = (0..n - 1).map(|k| y2[k + 1] + dt * g2[k]).collect();
                    let (q1, q2) = self.embed(&p1, &p2);
                    let (h1, h2) = self.alpha_terms_at(q1, q2, t_next, true);
                    let y1 = &self.state.y1;
                    let y2 = &self.state.y2;
                    (
                        (0..n).map(|k| y1[k + 1] + 0.5 * dt * (g1[k] + h1[k])).collect(),
                        (0..n - 1).map(|k| y2[k + 1] + 0.5 * dt * (g2[k] + h2[k])).collect(),
                    )
                };
                self.state.history.insert(0, (g1, g2));
                self.state.history.truncate(2);
                self.embed(&v1, &v2)
            }
        };
        self.state.y1 = ny1;
        self.state.y2 = ny2;
        self.state.step += 1;
        self.state.t = t_next;

        let m = self.state.max_abs();
        if !(m <= self.config.blowup) {
            return Err(Error::Unstable { t: t_next, max_abs: m });
        }
        self.refresh_alpha();
        self.accumulate();
        if self.state.step % self.config.record_stride as u64 == 0 {
            self.record();
        }
        Ok(())
    }

    fn accumulate(&mut self) {
        let start = (1.0 - self.config.saturated_fraction) * self.config.t_end;
        if self.state.t >= start - 0.5 * self.config.dt {
            for (s, a) in self.sat_sum.iter_mut().zip(&self.alpha_nodes) {
                *s += a;
            }
            self.sat_count += 1;
        }
        while let Some(&ts) = self.config.snapshot_times.get(self.next_snapshot) {
            if self.state.t + 0.5 * self.config.dt < ts {
                break;
            }
            self.series.snapshots.push(AlphaSnapshot {
                t: self.state.t,
                r: self.r_nodes.clone(),
                alpha: self.alpha_nodes.clone(),
            });
            self.next_snapshot += 1;
        }
    }

    fn record(&mut self) {
        let s = &self.state;
        self.series.t.push(s.t);
        self.series.dipole.push(s.dipole());
        self.series.toroidal_mid.push(s.toroidal_mid());
        self.series.energy.push(s.total_energy());
    }

    /// Steps until `t_end`.
    pub fn run(&mut self) -> Result<()> {
        let total = self.config.steps();
        while self.state.step < total {
            self.step()?;
        }
        Ok(())
    }

    /// Steps until `t ≥ t_stop` (or `t_end`, whichever comes first).
    pub fn run_until(&mut self, t_stop: f64) -> Result<()> {
        let total = self.config.steps().min((t_stop / self.config.dt).round() as u64);
        while self.state.step < total {
            self.step()?;
        }
        Ok(())
    }

    pub fn into_series(mut self) -> TimeSeries {
        if self.sat_count > 0 {
            let k = self.sat_count as f64;
            self.series.saturated_alpha = Some(self.sat_sum.iter().map(|s| s / k).collect());
        }
        self.series
    }

    pub fn into_parts(self) -> (TimeSeries, SimState) {
        let state = self.state.clone();
        (self.into_series(), state)
    }
}

#[allow(clippy::too_many_arguments)]
fn compute_alpha(
    config: &SimConfig,
    state: &SimState,
    kin_nodes: &[f64],
    kin_half: &[f64],
    r_nodes: &[f64],
    r_half: &[f64],
    xi: &[f64; 4],
    alpha_nodes: &mut [f64],
    alpha_half: &mut [f64],
) {
    let n = config.n;
    let inv_e0 = 1.0 / config.e0_mag;
    let quench = |kin: f64, e: f64| if config.quench { kin / (1.0 + e * inv_e0) } else { kin };
    for i in 1..=n {
        alpha_nodes[i] = quench(kin_nodes[i], energy_density(state, i)) + eval_xi(xi, r_nodes[i]);
    }
    alpha_nodes[0] = quench(kin_nodes[0], origin_energy(state)) + eval_xi(xi, 0.0);
    let h = config.h();
    for i in 0..n {
        let e = energy_density_half(&state.y1, &state.y2, h, i);
        alpha_half[i] = quench(kin_half[i], e) + eval_xi(xi, r_half[i]);
    }
}

/// Runs a configuration to `t_end`.
pub fn evolve(config: &SimConfig) -> Result<TimeSeries> {
    let mut sim = Simulation::new(config.clone())?;
    sim.run()?;
    Ok(sim.into_series())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::fit_linear_mode;
    use std::f64::consts::PI;

    fn nodal(n: usize, s: impl Fn(f64) -> f64, t: impl Fn(f64) -> f64) -> InitialField {
        let r = |i: usize| i as f64 / n as f64;
        InitialField::Nodal {
            s: (1..=n).map(|i| s(r(i))).collect(),
            t: (1..=n).map(|i| t(r(i))).collect(),
        }
    }

    fn quiet(n: usize) -> SimConfig {
        SimConfig {
            c: 0.0,
            n,
            dt: 1e-3,
            t_end: 0.1,
            ..SimConfig::default()
        }
    }

    #[test]
    fn energy_of_linear_poloidal_field() {
        // s = r, t = 0: 2 s²/r² + (∂(r s))²/r² = 2 + 4
        let cfg = SimConfig {
            initial: nodal(50, |r| r, |_| 0.0),
            ..quiet(50)
        };
        let sim = Simulation::new(cfg).unwrap();
        for i in 1..=50 {
            assert!((energy_density(sim.state(), i) - 6.0).abs() < 1e-10, "node {i}");
        }
        // ∫ 6 r² dr
        assert!((sim.state().total_energy() - 2.0).abs() < 2e-3);
    }

    #[test]
    fn quenching_divides_by_energy_ratio() {
        let mut cfg = SimConfig {
            initial: nodal(40, |r| r, |_| 0.0),
            shape: AlphaProfile::constant(1.0),
            c: 3.0,
            e0_mag: 2.0,
            ..quiet(40)
        };
        let sim = Simulation::new(cfg.clone()).unwrap();
        let a = quenched_alpha(sim.state(), &cfg, 40);
        assert!((a - 3.0 / (1.0 + 6.0 / 2.0)).abs() < 1e-9);
        assert!((sim.alpha_nodes()[20] - 0.75).abs() < 1e-9);
        cfg.quench = false;
        let sim = Simulation::new(cfg.clone()).unwrap();
        assert!((quenched_alpha(sim.state(), &cfg, 40) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn free_decay_rate() {
        let cfg = SimConfig {
            n: 100,
            c: 0.0,
            dt: 1e-3,
            t_end: 0.5,
            record_stride: 5,
            initial: InitialField::FreeDecay { amplitude: 1.0 },
            ..SimConfig::default()
        };
        let ts = evolve(&cfg).unwrap();
        let lambda = fit_linear_mode(&ts.t, &ts.dipole).unwrap();
        assert!((lambda.re + PI * PI).abs() < 0.02, "{lambda}");
        assert!(lambda.im.abs() < 1e-6);
    }

    #[test]
    fn boundary_conditions_hold_after_stepping() {
        let cfg = SimConfig {
            n: 40,
            c: 6.8,
            d: 2.0,
            dt: 1e-3,
            t_end: 0.2,
            initial: InitialField::Seed { amplitude: 1.0 },
            ..SimConfig::default()
        };
        let mut sim = Simulation::new(cfg).unwrap();
        sim.run().unwrap();
        let (robin, dirichlet) = sim.state().boundary_residuals();
        let scale = sim.state().max_abs();
        assert!(scale > 0.0);
        assert!(robin < 1e-10 * scale.max(1.0), "{robin}");
        assert_eq!(dirichlet, 0.0);
        assert_eq!(sim.state().y2()[0], 0.0);
        assert_eq!(sim.state().y1()[0], 0.0);
    }

    fn noisy(seed: u64, scheme: TimeScheme) -> SimConfig {
        SimConfig {
            n: 30,
            c: 10.0,
            d: 4.0,
            dt: if scheme == TimeScheme::Imex { 5e-4 } else { 1e-4 },
            t_end: 0.3,
            seed,
            scheme,
            record_stride: 1,
            initial: InitialField::Seed { amplitude: 0.5 },
            ..SimConfig::default()
        }
    }

    #[test]
    fn identical_seeds_identical_runs() {
        for scheme in [TimeScheme::Imex, TimeScheme::ExplicitAb3] {
            let a = evolve(&noisy(3, scheme)).unwrap();
            let b = evolve(&noisy(3, scheme)).unwrap();
            let c = evolve(&noisy(4, scheme)).unwrap();
            assert_eq!(a.dipole, b.dipole);
            assert_eq!(a.energy, b.energy);
            assert_ne!(a.dipole, c.dipole);
        }
    }

    #[test]
    fn checkpoint_round_trip_is_bit_identical() {
        for scheme in [TimeScheme::Imex, TimeScheme::ExplicitAb3] {
            let cfg = noisy(9, scheme);
            let mut straight = Simulation::new(cfg.clone()).unwrap();
            straight.run().unwrap();

            let mut first = Simulation::new(cfg.clone()).unwrap();
            first.run_until(0.13).unwrap();
            let bytes = first.state().to_bytes(&cfg);
            let restored = SimState::from_bytes(&bytes, &cfg).unwrap();
            assert_eq!(&restored, first.state());
            let mut second = Simulation::with_state(cfg.clone(), restored).unwrap();
            second.run().unwrap();
            assert_eq!(second.state(), straight.state());
        }
    }

    #[test]
    fn imex_is_second_order_in_time() {
        let run = |dt: f64| {
            let cfg = SimConfig {
                n: 40,
                c: 6.8,
                dt,
                t_end: 0.4,
                initial: InitialField::Seed { amplitude: 5.0 },
                e0_mag: 1.0,
                ..SimConfig::default()
            };
            let mut sim = Simulation::new(cfg).unwrap();
            sim.run().unwrap();
            sim.state().y1().to_vec()
        };
        let ys: Vec<Vec<f64>> = [2e-3, 1e-3, 5e-4].iter().map(|&dt| run(dt)).collect();
        let diff = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        let e1 = diff(&ys[0], &ys[1]);
        let e2 = diff(&ys[1], &ys[2]);
        let order = (e1 / e2).log2();
        assert!(order > 1.7 && order < 2.5, "observed order {order} ({e1}, {e2})");
    }

    #[test]
    fn unquenched_growth_reports_blow_up() {
        let cfg = SimConfig {
            n: 30,
            c: 20.0,
            quench: false,
            dt: 5e-4,
            t_end: 30.0,
            ..SimConfig::default()
        };
        match evolve(&cfg) {
            Err(e @ Error::Unstable { .. }) => assert!(e.is_numerical()),
            other => panic!("expected blow-up, got {other:?}"),
        }
    }

    #[test]
    fn time_step_above_stability_limit_is_rejected() {
        let cfg = SimConfig {
            c: 20.0,
            dt: 1e-2,
            ..SimConfig::default()
        };
        assert!(matches!(Simulation::new(cfg), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn snapshots_and_saturated_profile() {
        let cfg = SimConfig {
            n: 30,
            c: 6.8,
            dt: 1e-3,
            t_end: 1.0,
            snapshot_times: vec![0.25, 0.5, 2.0],
            ..SimConfig::default()
        };
        let ts = evolve(&cfg).unwrap();
        assert_eq!(ts.snapshots.len(), 2);
        assert!((ts.snapshots[0].t - 0.25).abs() < 1e-9);
        assert_eq!(ts.snapshots[0].alpha.len(), 31);
        let sat = ts.saturated_alpha.as_ref().unwrap();
        assert_eq!(sat.len(), 31);
        assert!(ts.saturated_profile().is_ok());
    }
}
