use serde::Serialize;

use super::sim::TimeSeries;

/// Post-transient summary of a dipole series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeMetrics {
    /// Start of the analysed window.
    pub t_from: f64,
    /// Sign changes of `d` in the window.
    pub sign_changes: usize,
    pub max_abs_dipole: f64,
    /// Time with `|d| ≥ max|d|/2` over time below it; 2 for a sinusoid,
    /// large when the dipole lingers at its crests and flips quickly.
    pub dwell_ratio: f64,
    /// Mean spacing of sign changes (half period), if any.
    pub mean_half_period: Option<f64>,
    pub mean_energy: f64,
}

impl RegimeMetrics {
    /// Dipole keeps reversing after the transient.
    pub fn is_oscillatory(&self) -> bool {
        self.sign_changes >= 2
    }
}

/// Metrics over the samples with `t ≥ skip_frac · t_last`.
pub fn regime_metrics(series: &TimeSeries, skip_frac: f64) -> RegimeMetrics {
    let n = series.len();
    let t_last = series.t.last().copied().unwrap_or(0.0);
    let t_from = skip_frac.clamp(0.0, 1.0) * t_last;
    let lo = series.t.partition_point(|&t| t < t_from);
    let t = &series.t[lo..n];
    let d = &series.dipole[lo..n];
    let mut crossings = Vec::new();
    for i in 1..d.len() {
        if d[i - 1] != 0.0 && d[i] != 0.0 && d[i - 1].signum() != d[i].signum() {
            crossings.push(t[i]);
        }
    }
    let max_abs = d.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let high = d.iter().filter(|v| v.abs() >= 0.5 * max_abs).count();
    let low = d.len() - high;
    let dwell_ratio = if low == 0 { f64::INFINITY } else { high as f64 / low as f64 };
    let mean_half_period = (crossings.len() >= 2)
        .then(|| (crossings[crossings.len() - 1] - crossings[0]) / (crossings.len() - 1) as f64);
    let e = &series.energy[lo..n];
    let mean_energy = if e.is_empty() { 0.0 } else { e.iter().sum::<f64>() / e.len() as f64 };
    RegimeMetrics {
        t_from,
        sign_changes: crossings.len(),
        max_abs_dipole: max_abs,
        dwell_ratio,
        mean_half_period,
        mean_energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series(f: impl Fn(f64) -> f64) -> TimeSeries {
        let t: Vec<f64> = (0..=10_000).map(|k| k as f64 * 0.001).collect();
        TimeSeries {
            dipole: t.iter().map(|&x| f(x)).collect(),
            toroidal_mid: vec![0.0; t.len()],
            energy: vec![1.0; t.len()],
            t,
            ..Default::default()
        }
    }

    #[test]
    fn sinusoid_dwell_ratio_is_two() {
        let m = regime_metrics(&series(|t| (2.0 * std::f64::consts::PI * t).sin()), 0.0);
        assert!((m.dwell_ratio - 2.0).abs() < 0.01, "{m:?}");
        assert_eq!(m.sign_changes, 19);
        assert!((m.mean_half_period.unwrap() - 0.5).abs() < 1e-3);
        assert!(m.is_oscillatory());
    }

    #[test]
    fn steady_series_has_no_crossings() {
        let m = regime_metrics(&series(|t| 1.0 - (-t).exp() + 0.1), 0.5);
        assert_eq!(m.sign_changes, 0);
        assert!(m.mean_half_period.is_none());
        assert!(!m.is_oscillatory());
    }
}
