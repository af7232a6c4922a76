use std::path::Path;

use alphadyn::dynamics::{regime_metrics, Simulation, TimeSeries};
use alphadyn::eigen::eigenvalues;
use alphadyn::io::{read_csv_columns, Cell};
use alphadyn::operator::{assemble, RadialGrid};
use alphadyn::reversal::{align_and_average, asymmetry, detect_reversals, ingest, rescale_to_geo, DipoleSeries};
use alphadyn::spectral::{
    anti_dynamo_check, find_exceptional_points, finiteness_norm_check, im_bound_check, linspace, sweep, CriterionReport,
    EpOptions, ScaledProfile, SpectralFamily, SweepOptions,
};
use alphadyn::{Error, Result};
use rayon::prelude::*;

use crate::config::{CheckConfig, EvolveConfig, ProfileSpec, RunConfig, SpectrumConfig};
use crate::output::{csv_column, Sink, Summary, Table};

fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}

/// C* sweep, branch table and exceptional points.
pub fn cmd_spectrum(cfg: &SpectrumConfig, sink: &Sink) -> Result<Summary> {
    if cfg.c_star_steps < 2 {
        return Err(invalid(format!("c_star_steps must be >= 2, got {}", cfg.c_star_steps)));
    }
    if !(cfg.c_star_min < cfg.c_star_max) {
        return Err(invalid(format!("empty C* range [{}, {}]", cfg.c_star_min, cfg.c_star_max)));
    }
    if cfg.k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    if !(cfg.ep_tol > 0.0) {
        return Err(invalid(format!("ep_tol must be positive, got {}", cfg.ep_tol)));
    }
    let profile = cfg.profile.to_profile()?;
    let grid = RadialGrid::new(cfg.n)?;
    let refine_grid = match cfg.ep_refine_n {
        0 => grid,
        n => RadialGrid::new(n)?,
    };
    let family = ScaledProfile::new(profile.clone(), cfg.l, grid);
    let params = linspace(cfg.c_star_min, cfg.c_star_max, cfg.c_star_steps);
    let opts = SweepOptions {
        k: cfg.k,
        ..Default::default()
    };
    let sw = sweep(&family, &params, opts)?;
    let eps = find_exceptional_points(
        &family.with_grid(refine_grid),
        &sw,
        EpOptions {
            tol: cfg.ep_tol,
            sweep: opts,
        },
    )?;

    let mut spec = Table::new(&["C_star", "branch_id", "re_lambda", "im_lambda"]);
    for b in &sw.branches {
        for (p, z) in b.params.iter().zip(&b.lambdas) {
            spec.push(vec![Cell::F(*p), Cell::I(b.id as i64), Cell::F(z.re), Cell::F(z.im)]);
        }
    }
    sink.table("spectrum", &spec)?;
    let mut ep_table = Table::new(&["C_star_ep", "re_lambda_ep", "branch_a", "branch_b"]);
    for e in &eps {
        ep_table.push(vec![
            Cell::F(e.c_star),
            Cell::F(e.lambda.re),
            Cell::I(e.branch_a as i64),
            Cell::I(e.branch_b as i64),
        ]);
    }
    sink.table("eps", &ep_table)?;

    let mut s = Summary::default();
    s.s("profile", cfg.profile.to_string()).i("l", cfg.l as i64).i("n", cfg.n as i64);
    s.f("c_star_min", cfg.c_star_min).f("c_star_max", cfg.c_star_max).i("c_star_steps", cfg.c_star_steps as i64);
    let at_one = family.spectrum_at(1.0)?;
    let lead = at_one.pairs[0].lambda;
    s.f("leading_at_c_star_1.re", lead.re).f("leading_at_c_star_1.im", lead.im);
    // sign changes of the leading growth rate along the sweep
    let growth: Vec<f64> = sw.leading.iter().map(|l| l[0].re).collect();
    let mut k = 0;
    for i in 1..growth.len() {
        if growth[i - 1].signum() != growth[i].signum() {
            let (p0, p1) = (params[i - 1], params[i]);
            let c = p0 - growth[i - 1] * (p1 - p0) / (growth[i] - growth[i - 1]);
            s.f(format!("zero_growth_{k}.c_star"), c);
            k += 1;
        }
    }
    s.i("zero_growth_crossings", k as i64);
    s.i("exceptional_points", eps.len() as i64);
    for (i, e) in eps.iter().enumerate() {
        s.f(format!("ep_{i}.c_star"), e.c_star)
            .f(format!("ep_{i}.re_lambda"), e.lambda.re)
            .f(format!("ep_{i}.im_lambda"), e.lambda.im)
            .f(format!("ep_{i}.distance_to_zero_growth"), e.lambda.re.abs())
            .i(format!("ep_{i}.branch_a"), e.branch_a as i64)
            .i(format!("ep_{i}.branch_b"), e.branch_b as i64)
            .s(format!("ep_{i}.kind"), format!("{:?}", e.kind))
            .b(format!("ep_{i}.resolved"), e.resolved);
    }
    s.i("ambiguous_matchings", sw.ambiguous_steps().len() as i64);
    sink.summary("spectrum_summary", &s)?;
    Ok(s)
}

/// The three criterion evaluators for one profile.
pub fn check_reports(cfg: &CheckConfig) -> Result<Vec<CriterionReport>> {
    let profile = cfg.profile.to_profile()?;
    let spectrum = eigenvalues(&assemble(cfg.l, &profile, RadialGrid::new(cfg.n)?)?)?;
    Ok(vec![
        anti_dynamo_check(&profile, cfg.l)?,
        im_bound_check(&spectrum, &profile, cfg.l)?,
        finiteness_norm_check(&profile)?,
    ])
}

pub fn cmd_check(cfg: &CheckConfig, sink: &Sink) -> Result<Summary> {
    let reports = check_reports(cfg)?;
    let opt = |v: Option<f64>| v.map_or(Cell::S(String::new()), Cell::F);
    let mut t = Table::new(&[
        "criterion",
        "l",
        "satisfied",
        "margin",
        "threshold_c",
        "quoted_threshold_c",
        "inconsistent",
        "sup_alpha",
        "sup_dalpha",
        "observed",
        "tolerance",
    ]);
    let mut s = Summary::default();
    s.s("profile", cfg.profile.to_string()).i("l", cfg.l as i64);
    for r in &reports {
        t.push(vec![
            Cell::S(r.criterion.as_str().into()),
            Cell::I(r.l as i64),
            Cell::S(r.satisfied.to_string()),
            Cell::F(r.margin),
            opt(r.threshold_c),
            opt(r.quoted_threshold_c),
            Cell::S(r.inconsistent.to_string()),
            Cell::F(r.sup_alpha),
            Cell::F(r.sup_dalpha),
            opt(r.observed),
            opt(r.tolerance),
        ]);
        let k = r.criterion.as_str();
        s.b(format!("{k}.satisfied"), r.satisfied)
            .f(format!("{k}.margin"), r.margin)
            .opt(format!("{k}.threshold_c"), r.threshold_c);
        if r.quoted_threshold_c.is_some() {
            s.opt(format!("{k}.quoted_threshold_c"), r.quoted_threshold_c)
                .b(format!("{k}.inconsistent"), r.inconsistent);
        }
        if r.observed.is_some() {
            s.opt(format!("{k}.observed_max_abs_im"), r.observed)
                .opt(format!("{k}.tolerance"), r.tolerance);
        }
    }
    sink.table("check", &t)?;
    sink.summary("check_summary", &s)?;
    Ok(s)
}

/// Runs the simulation and writes its series and α profiles.
pub fn run_evolve(cfg: &EvolveConfig, sink: &Sink) -> Result<TimeSeries> {
    let sim_cfg = cfg.to_sim_config()?;
    let mut sim = match &cfg.resume {
        Some(p) => Simulation::resume(sim_cfg, p)?,
        None => Simulation::new(sim_cfg)?,
    };
    sim.run()?;
    if let Some(p) = &cfg.checkpoint {
        sim.write_checkpoint(p)?;
    }
    let series = sim.into_series();
    let mut t = Table::new(&["t", "dipole_surface", "toroidal_mid", "energy_total"]);
    for i in 0..series.len() {
        t.push(vec![
            Cell::F(series.t[i]),
            Cell::F(series.dipole[i]),
            Cell::F(series.toroidal_mid[i]),
            Cell::F(series.energy[i]),
        ]);
    }
    sink.table("timeseries", &t)?;
    let h = 1.0 / cfg.n as f64;
    for (k, snap) in series.snapshots.iter().enumerate() {
        let mut a = Table::new(&["r", "alpha"]);
        for (r, v) in snap.r.iter().zip(&snap.alpha) {
            a.push(vec![Cell::F(*r), Cell::F(*v)]);
        }
        sink.table(&format!("alpha_snapshot_{k:03}"), &a)?;
    }
    if let Some(sat) = &series.saturated_alpha {
        let mut a = Table::new(&["r", "alpha"]);
        for (i, v) in sat.iter().enumerate() {
            a.push(vec![Cell::F(i as f64 * h), Cell::F(*v)]);
        }
        sink.table("alpha_saturated", &a)?;
    }
    Ok(series)
}

fn read_series(path: &Path) -> Result<TimeSeries> {
    let (header, cols) = read_csv_columns(path)?;
    Ok(TimeSeries {
        t: csv_column(path, &header, &cols, "t")?,
        dipole: csv_column(path, &header, &cols, "dipole_surface")?,
        toroidal_mid: csv_column(path, &header, &cols, "toroidal_mid")?,
        energy: csv_column(path, &header, &cols, "energy_total")?,
        ..Default::default()
    })
}

fn series_path(sink: &Sink) -> Result<std::path::PathBuf> {
    let p = sink.path("timeseries.csv");
    if p.exists() {
        Ok(p)
    } else {
        Err(invalid(format!("--replot needs {} (CSV output of a previous run)", p.display())))
    }
}

fn evolve_summary(series: &TimeSeries, cfg: &EvolveConfig) -> Summary {
    let m = regime_metrics(series, 0.5);
    let mut s = Summary::default();
    s.f("c", cfg.c).f("d", cfg.d).i("n", cfg.n as i64).f("dt", cfg.dt).f("t_end", cfg.t_end);
    s.i("seed", cfg.seed as i64).s("noise", cfg.noise.as_str()).s("scheme", cfg.scheme.as_str());
    s.i("samples", series.len() as i64);
    s.f("analysis_from_t", m.t_from)
        .i("sign_changes", m.sign_changes as i64)
        .b("oscillatory", m.is_oscillatory())
        .f("max_abs_dipole", m.max_abs_dipole)
        .f("dwell_ratio", m.dwell_ratio)
        .opt("mean_half_period", m.mean_half_period)
        .f("mean_energy", m.mean_energy);
    if let Some(e) = series.energy.last() {
        s.f("final_energy", *e);
    }
    s
}

pub fn cmd_evolve(cfg: &EvolveConfig, sink: &Sink, replot: bool) -> Result<Summary> {
    let series = if replot {
        read_series(&series_path(sink)?)?
    } else {
        run_evolve(cfg, sink)?
    };
    let s = evolve_summary(&series, cfg);
    sink.summary("evolve_summary", &s)?;
    Ok(s)
}

pub fn cmd_reversals(cfg: &RunConfig, sink: &Sink, replot: bool) -> Result<Summary> {
    let rc = &cfg.reversals;
    let (source, series) = match (&rc.input, replot) {
        (Some(p), _) => (p.display().to_string(), ingest(p)?),
        (None, true) => {
            let p = series_path(sink)?;
            (p.display().to_string(), DipoleSeries::from(&read_series(&p)?))
        }
        (None, false) => ("simulation".to_string(), DipoleSeries::from(&run_evolve(&cfg.evolve, sink)?)),
    };
    let geo = rescale_to_geo(&series, rc.time_scale, rc.vadm_scale)?;
    let events = detect_reversals(&geo, &rc.detect_options())?;
    let mut ev = Table::new(&["t_cross", "t_start", "t_end", "polarity_before"]);
    for e in &events {
        ev.push(vec![
            Cell::F(e.t_cross),
            Cell::F(e.t_start),
            Cell::F(e.t_end),
            Cell::I(e.polarity_before as i64),
        ]);
    }
    sink.table("events", &ev)?;

    let mut s = Summary::default();
    s.s("source", source).i("samples", geo.len() as i64).i("events", events.len() as i64);
    if events.len() >= 2 {
        let span = events[events.len() - 1].t_cross - events[0].t_cross;
        s.f("mean_spacing", span / (events.len() - 1) as f64);
    }
    let mut st = Table::new(&["t_rel", "mean_abs_dipole", "n_windows"]);
    let stack = if events.is_empty() {
        None
    } else {
        match align_and_average(&geo, &events, rc.t_before * rc.time_scale, rc.t_after * rc.time_scale) {
            Ok(stack) => Some(stack),
            Err(Error::InvalidInput(msg)) => {
                s.s("stack_note", msg);
                None
            }
            Err(e) => return Err(e),
        }
    };
    match &stack {
        Some(stack) => {
            for (t, m) in stack.t_rel.iter().zip(&stack.mean) {
                st.push(vec![Cell::F(*t), Cell::F(*m), Cell::I(stack.count() as i64)]);
            }
            let a = asymmetry(stack)?;
            s.i("stacked", stack.count() as i64)
                .i("skipped", stack.skipped as i64)
                .f("plateau", a.plateau)
                .opt("tau_dec", a.tau_dec)
                .opt("tau_rec", a.tau_rec)
                .opt("asymmetry_ratio", a.ratio)
                .b("ratio_defined", a.is_defined());
        }
        None => {
            s.i("stacked", 0);
        }
    }
    sink.table("stack", &st)?;
    sink.summary("reversals_summary", &s)?;
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReproKind {
    Check,
    Spectrum,
    Evolve,
    Reversals,
}

#[derive(Debug, Clone)]
pub struct ReproEntry {
    pub name: &'static str,
    pub kind: ReproKind,
    pub config: RunConfig,
}

/// Bundled configurations for the reference runs.
pub fn repro_entries() -> Vec<ReproEntry> {
    let mut out = Vec::new();
    let base = RunConfig::default;

    let mut c = base();
    c.check.profile = ProfileSpec::Constant(1.0);
    out.push(ReproEntry { name: "constant_check", kind: ReproKind::Check, config: c });

    let mut c = base();
    c.spectrum.profile = ProfileSpec::Constant(1.0);
    c.spectrum.c_star_min = 3.5;
    c.spectrum.c_star_max = 5.5;
    c.spectrum.c_star_steps = 41;
    c.spectrum.ep_refine_n = 0;
    out.push(ReproEntry { name: "constant_sweep", kind: ReproKind::Spectrum, config: c });

    let mut c = base();
    c.check.profile = ProfileSpec::Kinematic(1.0);
    out.push(ReproEntry { name: "kinematic_check", kind: ReproKind::Check, config: c });

    for (name, cc) in [("regime_c6.8", 6.8), ("regime_c7.237", 7.237), ("regime_c7.24", 7.24)] {
        let mut c = base();
        c.evolve.c = cc;
        c.evolve.n = 200;
        c.evolve.dt = 1e-3;
        c.evolve.t_end = 300.0;
        c.evolve.record_stride = 10;
        c.evolve.snapshot_times = vec![150.0, 200.0, 250.0, 300.0];
        out.push(ReproEntry { name, kind: ReproKind::Evolve, config: c });
    }

    let mut c = base();
    c.spectrum.profile = ProfileSpec::Kinematic(6.78);
    c.spectrum.ep_refine_n = 400;
    out.push(ReproEntry { name: "kinematic_sweep", kind: ReproKind::Spectrum, config: c });

    for (name, cc, d, dt) in [
        ("reversals_c20_d5", 20.0, 5.0, 2e-4),
        ("reversals_c20_d6", 20.0, 6.0, 2e-4),
        ("reversals_c50_d6", 50.0, 6.0, 5e-5),
    ] {
        let mut c = base();
        c.evolve.c = cc;
        c.evolve.d = d;
        c.evolve.dt = dt;
        c.evolve.n = 100;
        c.evolve.t_end = 50.0;
        out.push(ReproEntry { name, kind: ReproKind::Reversals, config: c });
    }
    out
}

/// Runs the bundled configurations (optionally only those whose name
/// contains `only`), each into its own subdirectory with its config file.
pub fn cmd_repro(sink: &Sink, only: Option<&str>, seed: Option<u64>) -> Result<Summary> {
    let entries: Vec<ReproEntry> = repro_entries()
        .into_iter()
        .filter(|e| only.is_none_or(|o| e.name.contains(o)))
        .map(|mut e| {
            if let Some(s) = seed {
                e.config.evolve.seed = s;
            }
            e
        })
        .collect();
    if entries.is_empty() {
        return Err(invalid(format!("no bundled run matches `{}`", only.unwrap_or(""))));
    }
    let results: Vec<Result<(String, Summary)>> = entries
        .par_iter()
        .map(|e| {
            let sub = sink.sub(e.name)?;
            sub.text("config.cfg", &e.config.serialize())?;
            let s = match e.kind {
                ReproKind::Check => cmd_check(&e.config.check, &sub)?,
                ReproKind::Spectrum => cmd_spectrum(&e.config.spectrum, &sub)?,
                ReproKind::Evolve => cmd_evolve(&e.config.evolve, &sub, false)?,
                ReproKind::Reversals => cmd_reversals(&e.config, &sub, false)?,
            };
            Ok((e.name.to_string(), s))
        })
        .collect();
    let mut s = Summary::default();
    for r in results {
        let (name, sub) = r?;
        for (k, v) in sub.entries {
            s.entries.push((format!("{name}.{k}"), v));
        }
    }
    sink.summary("repro_summary", &s)?;
    Ok(s)
}
