//! Polarity reversals of a dipole time series: detection, superposed-epoch
//! stacking and the decay/recovery asymmetry.

use std::path::Path;

use serde::Serialize;

use crate::dynamics::TimeSeries;
use crate::error::{Error, Result};
use crate::io::parse_two_columns;

/// A sampled dipole proxy `d(t)` on an increasing time grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DipoleSeries {
    pub t: Vec<f64>,
    pub d: Vec<f64>,
}

impl DipoleSeries {
    pub fn new(t: Vec<f64>, d: Vec<f64>) -> Result<Self> {
        if t.len() != d.len() {
            return Err(Error::InvalidInput(format!("{} times but {} values", t.len(), d.len())));
        }
        if t.iter().chain(&d).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("series contains non-finite values".into()));
        }
        if t.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("times must be strictly increasing".into()));
        }
        Ok(Self { t, d })
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// Median sampling interval.
    pub fn sample_interval(&self) -> f64 {
        let mut dts: Vec<f64> = self.t.windows(2).map(|w| w[1] - w[0]).collect();
        if dts.is_empty() {
            return 0.0;
        }
        median(&mut dts)
    }

    /// Linear interpolation of `|d|` at `t` (clamped to the series ends).
    fn abs_at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.d[0].abs();
        }
        if t >= self.t[n - 1] {
            return self.d[n - 1].abs();
        }
        let j = self.t.partition_point(|&x| x <= t);
        let (t0, t1) = (self.t[j - 1], self.t[j]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.d[j - 1].abs() + w * self.d[j].abs()
    }
}

impl From<&TimeSeries> for DipoleSeries {
    fn from(s: &TimeSeries) -> Self {
        Self {
            t: s.t.clone(),
            d: s.dipole.clone(),
        }
    }
}

/// Reads a two-column `(time, value)` text table: whitespace or comma
/// separated, `#` comments, optional header line.
pub fn ingest(path: &Path) -> Result<DipoleSeries> {
    let text = std::fs::read_to_string(path)?;
    let rows = parse_two_columns(&text, path)?;
    let (t, d) = rows.into_iter().unzip();
    DipoleSeries::new(t, d)
}

/// Affine relabelling of both axes (e.g. diffusion times to kyr, `s₁(1)` to
/// VADM units).
pub fn rescale_to_geo(series: &DipoleSeries, time_scale: f64, vadm_scale: f64) -> Result<DipoleSeries> {
    if !(time_scale > 0.0 && time_scale.is_finite() && vadm_scale > 0.0 && vadm_scale.is_finite()) {
        return Err(Error::InvalidInput("scales must be positive and finite".into()));
    }
    Ok(DipoleSeries {
        t: series.t.iter().map(|t| t * time_scale).collect(),
        d: series.d.iter().map(|d| d * vadm_scale).collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReversalEvent {
    /// Final sign change of `d` inside the event.
    pub t_cross: f64,
    /// Last time `|d|` was above the threshold with the old polarity.
    pub t_start: f64,
    /// First time `|d|` is above the threshold with the new polarity.
    pub t_end: f64,
    pub polarity_before: i8,
    pub polarity_after: i8,
    /// Time between the `|d|` maxima of the two bracketing polarity intervals.
    pub peak_to_peak: f64,
}

impl ReversalEvent {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DetectOptions {
    /// Fraction of the plateau level `|d|` must exceed on each side.
    pub threshold_frac: f64,
    /// Minimum time spent above threshold with one polarity.
    pub persistence: f64,
    /// Width of the trailing window for the plateau median; `None` uses the
    /// whole series.
    pub plateau_window: Option<f64>,
    /// Samples before this time are ignored (start-up transient).
    pub t_min: f64,
}

impl Default for DetectOptions {
    fn default() -> Self {
        Self {
            threshold_frac: 0.5,
            persistence: 0.05,
            plateau_window: None,
            t_min: 0.0,
        }
    }
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Plateau level of `|d|` at each sample.
fn plateau_levels(t: &[f64], d: &[f64], window: Option<f64>) -> Vec<f64> {
    let n = d.len();
    let abs: Vec<f64> = d.iter().map(|x| x.abs()).collect();
    match window {
        None => {
            let mut a = abs;
            let m = median(&mut a);
            vec![m; n]
        }
        Some(w) => {
            let mut out = vec![0.0; n];
            // recompute the trailing median every `stride` samples
            let per = if n > 1 { (t[n - 1] - t[0]) / (n - 1) as f64 } else { 1.0 };
            let stride = ((w / per) / 16.0).floor().max(1.0) as usize;
            let mut lo = 0;
            let mut current = 0.0;
            for i in 0..n {
                if i % stride == 0 {
                    while t[i] - t[lo] > w {
                        lo += 1;
                    }
                    let mut buf = abs[lo..=i].to_vec();
                    current = median(&mut buf);
                }
                out[i] = current;
            }
            out
        }
    }
}

/// Finds persistent polarity changes.
///
/// Samples are labelled `+1`/`-1` when `|d|` exceeds `threshold_frac` times
/// the plateau level and `0` otherwise. Maximal same-label stretches lasting
/// at least `persistence` are kept; every change of label between consecutive
/// kept stretches is one reversal, so sub-persistence excursions and jitter
/// around zero never produce extra events.
pub fn detect_reversals(series: &DipoleSeries, opts: &DetectOptions) -> Result<Vec<ReversalEvent>> {
    if series.is_empty() {
        return Err(Error::InvalidInput("empty series".into()));
    }
    if !(opts.threshold_frac > 0.0 && opts.threshold_frac < 1.0) {
        return Err(Error::InvalidInput(format!(
            "threshold_frac must be in (0, 1), got {}",
            opts.threshold_frac
        )));
    }
    if !(opts.persistence >= 0.0 && opts.persistence.is_finite()) {
        return Err(Error::InvalidInput(format!("persistence must be >= 0, got {}", opts.persistence)));
    }
    if let Some(w) = opts.plateau_window {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidInput(format!("plateau_window must be positive, got {w}")));
        }
    }
    let first = series.t.partition_point(|&t| t < opts.t_min);
    let t = &series.t[first..];
    let d = &series.d[first..];
    if t.is_empty() {
        return Ok(Vec::new());
    }
    let plateau = plateau_levels(t, d, opts.plateau_window);
    let label: Vec<i8> = d
        .iter()
        .zip(&plateau)
        .map(|(&x, &p)| {
            let thr = opts.threshold_frac * p;
            if thr <= 0.0 {
                0
            } else if x > thr {
                1
            } else if x < -thr {
                -1
            } else {
                0
            }
        })
        .collect();

    // (sign, first index, last index) of qualifying stretches
    let mut runs: Vec<(i8, usize, usize)> = Vec::new();
    let mut i = 0;
    while i < label.len() {
        let s = label[i];
        let mut j = i;
        while j + 1 < label.len() && label[j + 1] == s {
            j += 1;
        }
        if s != 0 && t[j] - t[i] >= opts.persistence {
            match runs.last_mut() {
                Some(last) if last.0 == s => last.2 = j,
                _ => runs.push((s, i, j)),
            }
        }
        i = j + 1;
    }

    let peak = |a: usize, b: usize| {
        (a..=b)
            .max_by(|&x, &y| d[x].abs().total_cmp(&d[y].abs()))
            .map(|k| t[k])
            .unwrap_or(t[a])
    };
    let mut events = Vec::new();
    for w in runs.windows(2) {
        let (sa, a0, a1) = w[0];
        let (sb, b0, b1) = w[1];
        if sa == sb {
            continue;
        }
        // last crossing into the new polarity before the new stretch starts
        let mut k = b0;
        while k > a1 && (d[k - 1] == 0.0 || d[k - 1].signum() as i8 == sb) {
            k -= 1;
        }
        // d[k-1] has the old sign (or k == a1), d[k] has the new sign
        let (tl, tr, dl, dr) = (t[k - 1], t[k], d[k - 1], d[k]);
        let t_cross = if dl != dr { tl + (tr - tl) * dl / (dl - dr) } else { 0.5 * (tl + tr) };
        let t_cross = t_cross.clamp(t[a1], t[b0]);
        events.push(ReversalEvent {
            t_cross,
            t_start: t[a1],
            t_end: t[b0],
            polarity_before: sa,
            polarity_after: sb,
            peak_to_peak: peak(b0, b1) - peak(a0, a1),
        });
    }
    Ok(events)
}

/// Superposed-epoch stack of `|d|` around the reversal crossings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReversalStack {
    /// Relative time grid `[-t_before, t_after]`.
    pub t_rel: Vec<f64>,
    /// One resampled `|d|` window per used event.
    pub windows: Vec<Vec<f64>>,
    /// Pointwise mean of `windows`.
    pub mean: Vec<f64>,
    pub t_before: f64,
    pub t_after: f64,
    /// Events whose window left the series span.
    pub skipped: usize,
}

impl ReversalStack {
    pub fn count(&self) -> usize {
        self.windows.len()
    }
}

/// Default stacking window `(t_before, t_after)` in diffusion times.
pub const DEFAULT_WINDOW: (f64, f64) = (0.4, 0.1);

/// Resamples `|d|` on a common grid around every event and averages.
///
/// Post-crossing values are folded to positive magnitude; the grid spacing is
/// the series' median sample interval.
pub fn align_and_average(
    series: &DipoleSeries,
    events: &[ReversalEvent],
    t_before: f64,
    t_after: f64,
) -> Result<ReversalStack> {
    if events.is_empty() {
        return Err(Error::InvalidInput("no events to stack".into()));
    }
    if !(t_before > 0.0 && t_after > 0.0 && t_before.is_finite() && t_after.is_finite()) {
        return Err(Error::InvalidInput("window lengths must be positive".into()));
    }
    if series.len() < 2 {
        return Err(Error::InvalidInput("series too short to resample".into()));
    }
    let dt = series.sample_interval();
    let steps = ((t_before + t_after) / dt).round().max(1.0) as usize;
    let h = (t_before + t_after) / steps as f64;
    let t_rel: Vec<f64> = (0..=steps).map(|k| -t_before + k as f64 * h).collect();
    let (lo, hi) = (series.t[0], series.t[series.len() - 1]);
    let mut windows = Vec::new();
    let mut skipped = 0;
    for e in events {
        if e.t_cross - t_before < lo - 1e-9 * h || e.t_cross + t_after > hi + 1e-9 * h {
            skipped += 1;
            continue;
        }
        windows.push(t_rel.iter().map(|&s| series.abs_at(e.t_cross + s)).collect::<Vec<f64>>());
    }
    if windows.is_empty() {
        return Err(Error::InvalidInput(format!(
            "all {skipped} event windows exceed the series span"
        )));
    }
    let k = windows.len() as f64;
    let mean = (0..t_rel.len())
        .map(|j| windows.iter().map(|w| w[j]).sum::<f64>() / k)
        .collect();
    Ok(ReversalStack {
        t_rel,
        windows,
        mean,
        t_before,
        t_after,
        skipped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymmetryReport {
    /// Median of the mean stack over the first third of the pre-window.
    pub plateau: f64,
    /// 90% → 10% fall time before the crossing.
    pub tau_dec: Option<f64>,
    /// 10% → 90% rise time after the crossing.
    pub tau_rec: Option<f64>,
    pub ratio: Option<f64>,
}

impl AsymmetryReport {
    pub fn is_defined(&self) -> bool {
        self.ratio.is_some()
    }
}

/// Decay and recovery times of the mean stack.
pub fn asymmetry(stack: &ReversalStack) -> Result<AsymmetryReport> {
    let t = &stack.t_rel;
    let m = &stack.mean;
    let pre_end = -stack.t_before + stack.t_before / 3.0;
    let mut head: Vec<f64> = t.iter().zip(m).filter(|(&s, _)| s <= pre_end + 1e-12).map(|(_, &v)| v).collect();
    if head.is_empty() {
        return Err(Error::InvalidInput("stack has no pre-reversal samples".into()));
    }
    let plateau = median(&mut head);
    if !(plateau > 0.0) {
        return Ok(AsymmetryReport {
            plateau,
            tau_dec: None,
            tau_rec: None,
            ratio: None,
        });
    }
    let zero = t.partition_point(|&s| s < 0.0).min(t.len() - 1);
    let (lo, hi) = (0.1 * plateau, 0.9 * plateau);
    // crossing time of `level` between samples j and j+1 (interpolated)
    let cross = |j: usize, level: f64| {
        let (a, b) = (m[j], m[j + 1]);
        if a == b {
            t[j]
        } else {
            t[j] + (t[j + 1] - t[j]) * (level - a) / (b - a)
        }
    };
    // backwards from the crossing: first reach of 10%, then of 90%
    let back = |level: f64, from: usize| -> Option<(f64, usize)> {
        let mut j = from;
        while j > 0 {
            if m[j - 1] >= level {
                return Some((cross(j - 1, level), j - 1));
            }
            j -= 1;
        }
        None
    };
    let fwd = |level: f64, from: usize| -> Option<(f64, usize)> {
        let mut j = from;
        while j + 1 < m.len() {
            if m[j + 1] >= level {
                return Some((cross(j, level), j + 1));
            }
            j += 1;
        }
        None
    };
    let tau_dec = back(lo, zero).and_then(|(t10, j)| back(hi, j + 1).map(|(t90, _)| t10 - t90));
    let tau_rec = fwd(lo, zero).and_then(|(t10, j)| fwd(hi, j - 1).map(|(t90, _)| t90 - t10));
    let ratio = match (tau_dec, tau_rec) {
        (Some(a), Some(b)) if b > 0.0 => Some(a / b),
        _ => None,
    };
    Ok(AsymmetryReport {
        plateau,
        tau_dec,
        tau_rec,
        ratio,
    })
}
