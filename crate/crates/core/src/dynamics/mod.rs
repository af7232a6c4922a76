//! Nonlinear evolution of the dipole with quenched, noisy α.

mod analysis;
mod checkpoint;
mod config;
mod noise;
mod sim;
mod tridiag;

pub use analysis::{regime_metrics, RegimeMetrics};
pub use checkpoint::{MAGIC as CHECKPOINT_MAGIC, VERSION as CHECKPOINT_VERSION};
pub use config::{InitialField, SimConfig, TimeScheme, AB3_STABILITY, IMEX_STABILITY};
pub use noise::{eval_xi, NoiseDistribution, NoiseState};
pub use sim::{energy_density, evolve, quenched_alpha, AlphaSnapshot, SimState, Simulation, TimeSeries, DEGREE};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Fits `values(t) ≈ Re(A e^{λt})` on a uniform grid by two-term linear
/// prediction and returns `λ` (imaginary part ≥ 0).
///
/// A signal without oscillation is fitted with a single exponential.
pub fn fit_linear_mode(times: &[f64], values: &[f64]) -> Result<Complex64> {
    if times.len() != values.len() || times.len() < 4 {
        return Err(Error::InvalidInput("need at least four equally sized samples".into()));
    }
    let dt = times[1] - times[0];
    if !(dt > 0.0) {
        return Err(Error::InvalidInput("times must increase".into()));
    }
    // normalise to keep the normal equations well scaled
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(Error::InvalidInput("signal is zero or non-finite".into()));
    }
    let v: Vec<f64> = values.iter().map(|x| x / scale).collect();
    // least squares for v[k+1] = a1 v[k] + a2 v[k-1]
    let (mut s11, mut s12, mut s22, mut b1, mut b2) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for k in 1..v.len() - 1 {
        let (x1, x2, y) = (v[k], v[k - 1], v[k + 1]);
        s11 += x1 * x1;
        s12 += x1 * x2;
        s22 += x2 * x2;
        b1 += x1 * y;
        b2 += x2 * y;
    }
    let det = s11 * s22 - s12 * s12;
    let (a1, a2) = if det.abs() > 1e-14 * s11 * s22 {
        ((b1 * s22 - b2 * s12) / det, (s11 * b2 - s12 * b1) / det)
    } else {
        // effectively a single exponential
        (b1 / s11, 0.0)
    };
    let disc = a1 * a1 + 4.0 * a2;
    let z = if disc < 0.0 {
        Complex64::new(0.5 * a1, 0.5 * (-disc).sqrt())
    } else {
        // real roots: the two-term fit is ill-conditioned, use one term
        Complex64::new(b1 / s11, 0.0)
    };
    if z.norm() == 0.0 {
        return Err(Error::InvalidInput("signal has no resolvable mode".into()));
    }
    Ok(z.ln() / dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_damped_oscillation() {
        let lam = Complex64::new(-0.3, 4.4);
        let t: Vec<f64> = (0..400).map(|k| k as f64 * 0.01).collect();
        let v: Vec<f64> = t.iter().map(|&t| (lam * t).exp().re * 3.0 + 0.0).collect();
        let fit = fit_linear_mode(&t, &v).unwrap();
        assert!((fit - lam).norm() < 1e-9, "{fit}");
    }

    #[test]
    fn recovers_pure_decay() {
        let t: Vec<f64> = (0..100).map(|k| k as f64 * 0.002).collect();
        let v: Vec<f64> = t.iter().map(|&t| (-9.8696 * t).exp()).collect();
        let fit = fit_linear_mode(&t, &v).unwrap();
        assert!((fit.re + 9.8696).abs() < 1e-6 && fit.im.abs() < 1e-9, "{fit}");
    }
}
