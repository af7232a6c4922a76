//! Flat `key = value` run configuration with `[section]` headers.
//!
//! ```text
//! # comment
//! [evolve]
//! c = 6.8
//! shape = kinematic 1.0
//! snapshot_times = 1.0, 2.5
//! ```
//!
//! Floats are written in Rust's shortest round-trip form, so
//! `parse(serialize(cfg)) == cfg` holds exactly.

use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use alphadyn::dynamics::{InitialField, NoiseDistribution, SimConfig, TimeScheme};
use alphadyn::operator::AlphaProfile;
use alphadyn::reversal::{DetectOptions, DEFAULT_WINDOW};
use alphadyn::{Error, Result};

/// Profile grammar: `constant C`, `kinematic C`, `poly C e:c ...`,
/// `file C PATH` (two-column `r α` table scaled by `C`).
#[derive(Debug, Clone, PartialEq)]
pub enum ProfileSpec {
    Constant(f64),
    Kinematic(f64),
    Poly(f64, Vec<(u32, f64)>),
    File(f64, PathBuf),
}

impl ProfileSpec {
    pub fn to_profile(&self) -> Result<AlphaProfile> {
        Ok(match self {
            ProfileSpec::Constant(c) => AlphaProfile::constant(*c),
            ProfileSpec::Kinematic(c) => AlphaProfile::kinematic(*c),
            ProfileSpec::Poly(c, terms) => AlphaProfile::from_terms(*c, terms),
            ProfileSpec::File(c, path) => AlphaProfile::from_table_file(*c, path)?,
        })
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            ProfileSpec::Constant(c) | ProfileSpec::Kinematic(c) | ProfileSpec::Poly(c, _) | ProfileSpec::File(c, _) => *c,
        }
    }
}

impl fmt::Display for ProfileSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProfileSpec::Constant(c) => write!(f, "constant {c:?}"),
            ProfileSpec::Kinematic(c) => write!(f, "kinematic {c:?}"),
            ProfileSpec::Poly(c, terms) => {
                write!(f, "poly {c:?}")?;
                for (e, v) in terms {
                    write!(f, " {e}:{v:?}")?;
                }
                Ok(())
            }
            ProfileSpec::File(c, p) => write!(f, "file {c:?} {}", p.display()),
        }
    }
}

impl FromStr for ProfileSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let mut parts = s.split_whitespace();
        let kind = parts.next().ok_or("empty profile")?;
        let amp = parts.next().ok_or_else(|| format!("profile `{kind}` needs an amplitude"))?;
        let c = parse_f64(amp)?;
        match kind {
            "constant" | "kinematic" => {
                if let Some(extra) = parts.next() {
                    return Err(format!("unexpected `{extra}` after {kind} amplitude"));
                }
                Ok(if kind == "constant" {
                    ProfileSpec::Constant(c)
                } else {
                    ProfileSpec::Kinematic(c)
                })
            }
            "poly" => {
                let mut terms = Vec::new();
                for t in parts {
                    let (e, v) = t.split_once(':').ok_or_else(|| format!("poly term `{t}` is not e:c"))?;
                    let e: u32 = e.parse().map_err(|_| format!("bad exponent `{e}`"))?;
                    if e > 64 {
                        return Err(format!("exponent {e} too large"));
                    }
                    terms.push((e, parse_f64(v)?));
                }
                if terms.is_empty() {
                    return Err("poly needs at least one e:c term".into());
                }
                Ok(ProfileSpec::Poly(c, terms))
            }
            "file" => {
                let rest: Vec<&str> = parts.collect();
                if rest.is_empty() {
                    return Err("file profile needs a path".into());
                }
                Ok(ProfileSpec::File(c, PathBuf::from(rest.join(" "))))
            }
            _ => Err(format!("unknown profile kind `{kind}` (constant|kinematic|poly|file)")),
        }
    }
}

/// Starting field grammar: `seed A` or `free_decay A`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Seed(f64),
    FreeDecay(f64),
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::Seed(a) => write!(f, "seed {a:?}"),
            InitialSpec::FreeDecay(a) => write!(f, "free_decay {a:?}"),
        }
    }
}

impl FromStr for InitialSpec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parts: Vec<&str> = s.split_whitespace().collect();
        match parts.as_slice() {
            ["seed", a] => Ok(InitialSpec::Seed(parse_f64(a)?)),
            ["free_decay", a] => Ok(InitialSpec::FreeDecay(parse_f64(a)?)),
            _ => Err(format!("initial field `{s}` is not `seed A` or `free_decay A`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumConfig {
    pub profile: ProfileSpec,
    pub l: u32,
    pub n: usize,
    pub c_star_min: f64,
    pub c_star_max: f64,
    pub c_star_steps: usize,
    /// Leading eigenvalues followed along the sweep.
    pub k: usize,
    pub ep_tol: f64,
    /// Resolution for EP refinement; 0 refines on the sweep grid itself.
    pub ep_refine_n: usize,
}

impl Default for SpectrumConfig {
    fn default() -> Self {
        Self {
            profile: ProfileSpec::Kinematic(6.78),
            l: 1,
            n: 200,
            c_star_min: 0.0,
            c_star_max: 1.2,
            c_star_steps: 49,
            k: 6,
            ep_tol: 1e-3,
            ep_refine_n: 800,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckConfig {
    pub profile: ProfileSpec,
    pub l: u32,
    /// Resolution of the spectrum used by the imaginary-part bound.
    pub n: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            profile: ProfileSpec::Kinematic(1.0),
            l: 1,
            n: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolveConfig {
    pub c: f64,
    pub d: f64,
    pub tau_corr: f64,
    pub e0_mag: f64,
    pub n: usize,
    pub dt: f64,
    pub t_end: f64,
    pub seed: u64,
    pub record_stride: usize,
    /// Unit-amplitude shape multiplied by `c`.
    pub shape: ProfileSpec,
    pub quench: bool,
    pub scheme: TimeScheme,
    pub noise: NoiseDistribution,
    pub initial: InitialSpec,
    pub snapshot_times: Vec<f64>,
    pub saturated_fraction: f64,
    /// Write a restart file here at the end of the run.
    pub checkpoint: Option<PathBuf>,
    /// Start from this restart file instead of the initial field.
    pub resume: Option<PathBuf>,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        let s = SimConfig::default();
        Self {
            c: s.c,
            d: s.d,
            tau_corr: s.tau_corr,
            e0_mag: s.e0_mag,
            n: s.n,
            dt: 1e-3,
            t_end: s.t_end,
            seed: s.seed,
            record_stride: s.record_stride,
            shape: ProfileSpec::Kinematic(1.0),
            quench: s.quench,
            scheme: s.scheme,
            noise: s.noise,
            initial: InitialSpec::Seed(1e-4),
            snapshot_times: Vec::new(),
            saturated_fraction: s.saturated_fraction,
            checkpoint: None,
            resume: None,
        }
    }
}

impl EvolveConfig {
    pub fn to_sim_config(&self) -> Result<SimConfig> {
        let cfg = SimConfig {
            c: self.c,
            d: self.d,
            tau_corr: self.tau_corr,
            e0_mag: self.e0_mag,
            n: self.n,
            dt: self.dt,
            t_end: self.t_end,
            seed: self.seed,
            record_stride: self.record_stride,
            shape: self.shape.to_profile()?,
            quench: self.quench,
            scheme: self.scheme,
            noise: self.noise,
            initial: match self.initial {
                InitialSpec::Seed(amplitude) => InitialField::Seed { amplitude },
                InitialSpec::FreeDecay(amplitude) => InitialField::FreeDecay { amplitude },
            },
            snapshot_times: self.snapshot_times.clone(),
            saturated_fraction: self.saturated_fraction,
            ..SimConfig::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReversalConfig {
    pub threshold_frac: f64,
    pub persistence: f64,
    pub plateau_window: Option<f64>,
    pub t_min: f64,
    pub t_before: f64,
    pub t_after: f64,
    /// Output time unit per diffusion time (e.g. kyr).
    pub time_scale: f64,
    pub vadm_scale: f64,
    /// Analyse this two-column `t d` file instead of simulating.
    pub input: Option<PathBuf>,
}

impl Default for ReversalConfig {
    fn default() -> Self {
        let d = DetectOptions::default();
        Self {
            threshold_frac: d.threshold_frac,
            persistence: d.persistence,
            plateau_window: d.plateau_window,
            t_min: 2.0,
            t_before: DEFAULT_WINDOW.0,
            t_after: DEFAULT_WINDOW.1,
            time_scale: 1.0,
            vadm_scale: 1.0,
            input: None,
        }
    }
}

impl ReversalConfig {
    /// Detection options in the rescaled time unit.
    pub fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            threshold_frac: self.threshold_frac,
            persistence: self.persistence * self.time_scale,
            plateau_window: self.plateau_window.map(|w| w * self.time_scale),
            t_min: self.t_min * self.time_scale,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RunConfig {
    pub spectrum: SpectrumConfig,
    pub check: CheckConfig,
    pub evolve: EvolveConfig,
    pub reversals: ReversalConfig,
}

fn parse_f64(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.trim().parse().map_err(|_| format!("`{s}` is not a number"))?;
    if !v.is_finite() {
        return Err(format!("`{s}` is not finite"));
    }
    Ok(v)
}

fn parse_int<T: FromStr>(s: &str) -> std::result::Result<T, String> {
    s.trim().parse().map_err(|_| format!("`{s}` is not a non-negative integer"))
}

fn parse_bool(s: &str) -> std::result::Result<bool, String> {
    match s.trim() {
        "true" | "yes" | "on" => Ok(true),
        "false" | "no" | "off" => Ok(false),
        _ => Err(format!("`{s}` is not a boolean")),
    }
}

fn parse_opt_f64(s: &str) -> std::result::Result<Option<f64>, String> {
    if s.trim() == "none" {
        Ok(None)
    } else {
        parse_f64(s).map(Some)
    }
}

fn parse_opt_path(s: &str) -> Option<PathBuf> {
    let s = s.trim();
    (s != "none" && !s.is_empty()).then(|| PathBuf::from(s))
}

fn parse_list(s: &str) -> std::result::Result<Vec<f64>, String> {
    if s.trim().is_empty() {
        return Ok(Vec::new());
    }
    s.split(',').map(parse_f64).collect()
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text, path)
    }

    /// Parses config text; `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let mut cfg = RunConfig::default();
        let mut section: Option<String> = None;
        for (idx, raw) in text.lines().enumerate() {
            let err = |msg: String| Error::Parse {
                path: path.to_owned(),
                line: idx + 1,
                msg,
            };
            let line = match raw.find(" #") {
                Some(p) => &raw[..p],
                None => raw,
            }
            .trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(name) = line.strip_prefix('[') {
                let name = name.strip_suffix(']').ok_or_else(|| err(format!("unterminated section `{line}`")))?;
                let name = name.trim();
                if !matches!(name, "spectrum" | "check" | "evolve" | "reversals") {
                    return Err(err(format!("unknown section [{name}]")));
                }
                section = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let sec = section
                .as_deref()
                .ok_or_else(|| err(format!("`{key}` appears before any [section]")))?;
            cfg.set(sec, key, value).map_err(err)?;
        }
        Ok(cfg)
    }

    fn set(&mut self, section: &str, key: &str, v: &str) -> std::result::Result<(), String> {
        let unknown = || Err(format!("unknown key `{key}` in [{section}]"));
        match section {
            "spectrum" => {
                let s = &mut self.spectrum;
                match key {
                    "profile" => s.profile = v.parse()?,
                    "l" => s.l = parse_int(v)?,
                    "n" => s.n = parse_int(v)?,
                    "c_star_min" => s.c_star_min = parse_f64(v)?,
                    "c_star_max" => s.c_star_max = parse_f64(v)?,
                    "c_star_steps" => s.c_star_steps = parse_int(v)?,
                    "k" => s.k = parse_int(v)?,
                    "ep_tol" => s.ep_tol = parse_f64(v)?,
                    "ep_refine_n" => s.ep_refine_n = parse_int(v)?,
                    _ => return unknown(),
                }
            }
            "check" => {
                let s = &mut self.check;
                match key {
                    "profile" => s.profile = v.parse()?,
                    "l" => s.l = parse_int(v)?,
                    "n" => s.n = parse_int(v)?,
                    _ => return unknown(),
                }
            }
            "evolve" => {
                let s = &mut self.evolve;
                match key {
                    "c" => s.c = parse_f64(v)?,
                    "d" => s.d = parse_f64(v)?,
                    "tau_corr" => s.tau_corr = parse_f64(v)?,
                    "e0_mag" => s.e0_mag = parse_f64(v)?,
                    "n" => s.n = parse_int(v)?,
                    "dt" => s.dt = parse_f64(v)?,
                    "t_end" => s.t_end = parse_f64(v)?,
                    "seed" => s.seed = parse_int(v)?,
                    "record_stride" => s.record_stride = parse_int(v)?,
                    "shape" => s.shape = v.parse()?,
                    "quench" => s.quench = parse_bool(v)?,
                    "scheme" => s.scheme = v.parse()?,
                    "noise" => s.noise = v.parse()?,
                    "initial" => s.initial = v.parse()?,
                    "snapshot_times" => s.snapshot_times = parse_list(v)?,
                    "saturated_fraction" => s.saturated_fraction = parse_f64(v)?,
                    "checkpoint" => s.checkpoint = parse_opt_path(v),
                    "resume" => s.resume = parse_opt_path(v),
                    _ => return unknown(),
                }
            }
            "reversals" => {
                let s = &mut self.reversals;
                match key {
                    "threshold_frac" => s.threshold_frac = parse_f64(v)?,
                    "persistence" => s.persistence = parse_f64(v)?,
                    "plateau_window" => s.plateau_window = parse_opt_f64(v)?,
                    "t_min" => s.t_min = parse_f64(v)?,
                    "t_before" => s.t_before = parse_f64(v)?,
                    "t_after" => s.t_after = parse_f64(v)?,
                    "time_scale" => s.time_scale = parse_f64(v)?,
                    "vadm_scale" => s.vadm_scale = parse_f64(v)?,
                    "input" => s.input = parse_opt_path(v),
                    _ => return unknown(),
                }
            }
            _ => unreachable!("sections are checked by the caller"),
        }
        Ok(())
    }

    pub fn serialize(&self) -> String {
        let mut o = String::new();
        let opt_path = |p: &Option<PathBuf>| p.as_ref().map_or("none".to_string(), |p| p.display().to_string());
        let s = &self.spectrum;
        let _ = writeln!(o, "[spectrum]");
        let _ = writeln!(o, "profile = {}", s.profile);
        let _ = writeln!(o, "l = {}", s.l);
        let _ = writeln!(o, "n = {}", s.n);
        let _ = writeln!(o, "c_star_min = {:?}", s.c_star_min);
        let _ = writeln!(o, "c_star_max = {:?}", s.c_star_max);
        let _ = writeln!(o, "c_star_steps = {}", s.c_star_steps);
        let _ = writeln!(o, "k = {}", s.k);
        let _ = writeln!(o, "ep_tol = {:?}", s.ep_tol);
        let _ = writeln!(o, "ep_refine_n = {}", s.ep_refine_n);
        let c = &self.check;
        let _ = writeln!(o, "\n[check]");
        let _ = writeln!(o, "profile = {}", c.profile);
        let _ = writeln!(o, "l = {}", c.l);
        let _ = writeln!(o, "n = {}", c.n);
        let e = &self.evolve;
        let _ = writeln!(o, "\n[evolve]");
        let _ = writeln!(o, "c = {:?}", e.c);
        let _ = writeln!(o, "d = {:?}", e.d);
        let _ = writeln!(o, "tau_corr = {:?}", e.tau_corr);
        let _ = writeln!(o, "e0_mag = {:?}", e.e0_mag);
        let _ = writeln!(o, "n = {}", e.n);
        let _ = writeln!(o, "dt = {:?}", e.dt);
        let _ = writeln!(o, "t_end = {:?}", e.t_end);
        let _ = writeln!(o, "seed = {}", e.seed);
        let _ = writeln!(o, "record_stride = {}", e.record_stride);
        let _ = writeln!(o, "shape = {}", e.shape);
        let _ = writeln!(o, "quench = {}", e.quench);
        let _ = writeln!(o, "scheme = {}", e.scheme.as_str());
        let _ = writeln!(o, "noise = {}", e.noise.as_str());
        let _ = writeln!(o, "initial = {}", e.initial);
        let times: Vec<String> = e.snapshot_times.iter().map(|t| format!("{t:?}")).collect();
        let _ = writeln!(o, "snapshot_times = {}", times.join(", "));
        let _ = writeln!(o, "saturated_fraction = {:?}", e.saturated_fraction);
        let _ = writeln!(o, "checkpoint = {}", opt_path(&e.checkpoint));
        let _ = writeln!(o, "resume = {}", opt_path(&e.resume));
        let r = &self.reversals;
        let _ = writeln!(o, "\n[reversals]");
        let _ = writeln!(o, "threshold_frac = {:?}", r.threshold_frac);
        let _ = writeln!(o, "persistence = {:?}", r.persistence);
        let _ = writeln!(o, "plateau_window = {}", r.plateau_window.map_or("none".into(), |w| format!("{w:?}")));
        let _ = writeln!(o, "t_min = {:?}", r.t_min);
        let _ = writeln!(o, "t_before = {:?}", r.t_before);
        let _ = writeln!(o, "t_after = {:?}", r.t_after);
        let _ = writeln!(o, "time_scale = {:?}", r.time_scale);
        let _ = writeln!(o, "vadm_scale = {:?}", r.vadm_scale);
        let _ = writeln!(o, "input = {}", opt_path(&r.input));
        o
    }
}
