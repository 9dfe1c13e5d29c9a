use std::path::Path;

use sideband_core::config::RunConfig;
use sideband_core::evaluation::{default_sweep_axes, optimize_thickness, spectral_error, sweep_integration_with};
use sideband_core::events::sample_events;
use sideband_core::filters::{combined_filter, FilterParams};
use sideband_core::io::{
    events_csv, fmt17, grid_csv, read_json, spectrum_csv, svg_heatmap, svg_lines, sweep_csv, sweep_triples_csv, to_json,
};
use sideband_core::recovery::{cosine_fit, doppler_from_grid, doppler_recover, recover_phase, Method, RecoveredSpectrum};
use sideband_core::selfcheck::run_all;
use sideband_core::simulate::{detector_intensity, ExperimentConfig, IntensityGrid, MotionKind};
use sideband_core::units::thickness_param;
use sideband_core::{Error, Result};

use crate::manifest::Recorder;
use crate::Failure;

fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    RunConfig::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn check_window(t1: f64, t2: f64) -> Result<()> {
    if !(t1.is_finite() && t2.is_finite() && t2 > t1) {
        return Err(Error::Config(format!("t2 = {t2} ns must exceed t1 = {t1} ns")));
    }
    Ok(())
}

fn warn_separation(cfg: &ExperimentConfig) {
    if !cfg.separation_ok {
        eprintln!(
            "warning: separation condition violated (S = {} <= 5l = {}); sideband bands may overlap",
            cfg.offset,
            5.0 * cfg.support_halfwidth
        );
    }
}

/// Axes and metadata must describe the stored values.
fn check_grid(grid: &IntensityGrid) -> Result<()> {
    let meta = &grid.meta;
    meta.validate().map_err(|e| Error::GridMismatch(format!("grid metadata invalid: {e}")))?;
    let want = grid.time.count * grid.phi0.len() * grid.omega_p.len();
    if grid.values.len() != want {
        return Err(Error::GridMismatch(format!("{} values for axes of size {want}", grid.values.len())));
    }
    if grid.omega_p != meta.omega_p_scan {
        return Err(Error::GridMismatch("scan axis differs from the metadata".into()));
    }
    if grid.phi0 != meta.phi0_axis() {
        return Err(Error::GridMismatch("phi0 axis differs from the metadata".into()));
    }
    let full = meta.window_grid()?;
    let rel = (grid.time.spacing - full.spacing).abs() / full.spacing;
    if rel > 1e-12 || grid.time.start < full.start - 1e-9 * full.spacing || grid.time.end() > full.end() + 1e-9 * full.spacing {
        return Err(Error::GridMismatch("time axis is not a sub-range of the metadata window".into()));
    }
    if grid.values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
        return Err(Error::GridMismatch("intensity values must be finite and non-negative".into()));
    }
    Ok(())
}

fn spectrum_svg(rec: &RecoveredSpectrum, cfg: &ExperimentConfig) -> String {
    let top = rec.detuning.iter().map(|&d| cfg.target.response_at(d).norm_sqr()).fold(0.0, f64::max).max(1e-300);
    let reference: Vec<f64> = rec.detuning.iter().map(|&d| cfg.target.response_at(d).norm_sqr() / top).collect();
    svg_lines(
        &format!("{} [{}, {}] ns", rec.method.name(), rec.window_ns.0, rec.window_ns.1),
        &[("recovered", &rec.detuning, &rec.amplitude_sq), ("reference", &rec.detuning, &reference)],
    )
}

fn write_spectrum(rec: &mut Recorder, spec: &RecoveredSpectrum, cfg: &ExperimentConfig, svg: bool) -> Result<()> {
    rec.write("spectrum.csv", &spectrum_csv(spec))?;
    rec.write("spectrum.json", &to_json(spec)?)?;
    if svg {
        rec.write("spectrum.svg", &spectrum_svg(spec, cfg))?;
    }
    rec.note("excluded", spec.excluded);
    rec.note("spectral_error", spectral_error(spec, &cfg.target)?);
    Ok(())
}

pub fn simulate(config: &Path, out: &Path, seed: u64) -> std::result::Result<(), Failure> {
    let rc = load_config(config)?;
    let cfg = rc.experiment()?;
    warn_separation(&cfg);
    let mut rec = Recorder::new(out, "simulate", Some(seed), &rc)?;
    rec.input(config)?;
    let grid = detector_intensity(&cfg)?;
    rec.write("config.toml", &rc.to_toml()?)?;
    rec.write("grid.json", &to_json(&grid)?)?;
    rec.write("intensity.csv", &grid_csv(&grid))?;
    if rc.output.events {
        let ev = sample_events(&grid, rc.output.mean_counts, seed)?;
        rec.note("events", ev.len());
        rec.write("events.csv", &events_csv(&ev))?;
    }
    rec.note("separation_ok", cfg.separation_ok);
    rec.note("resolved_dt_ns", cfg.resolved_dt_ns()?);
    rec.finish()?;
    Ok(())
}

pub fn recover(grid_path: &Path, method: Method, t1: f64, t2: f64, out: &Path, config: Option<&Path>) -> std::result::Result<(), Failure> {
    check_window(t1, t2)?;
    let rc = config.map(load_config).transpose()?;
    let grid: IntensityGrid = read_json(grid_path).map_err(|e| match e {
        Error::Serialization(m) => Error::GridMismatch(m),
        other => other,
    })?;
    check_grid(&grid)?;
    let cfg = &grid.meta;
    let mut rec = Recorder::new(out, "recover", None, &serde_json::json!({ "method": method.name(), "t1_ns": t1, "t2_ns": t2, "filter": rc.as_ref().map(|r| r.filter.clone()) }))?;
    rec.input(grid_path)?;
    let spec = match method {
        Method::Phantasy => {
            if cfg.motion == MotionKind::Doppler {
                return Err(Error::Contract("phantasy recovery needs a harmonic or PSSL grid".into()).into());
            }
            let params = match &rc {
                Some(r) => r.filter_params(cfg)?,
                None => FilterParams::for_config(cfg),
            };
            let fs = combined_filter(&grid, &params)?;
            if fs.separation_warning {
                eprintln!("warning: separation condition violated for the filter parameters");
            }
            rec.note("imag_residue", fs.imag_residue);
            rec.note("separation_warning", fs.separation_warning);
            recover_phase(&cosine_fit(&fs)?, t1, t2)?
        }
        Method::Doppler => doppler_from_grid(&grid, t1, t2)?,
    };
    write_spectrum(&mut rec, &spec, cfg, rc.as_ref().is_some_and(|r| r.output.svg))?;
    rec.finish()?;
    Ok(())
}

pub fn baseline(config: &Path, out: &Path, t1: f64, t2: f64, thickness: &[f64]) -> std::result::Result<(), Failure> {
    check_window(t1, t2)?;
    let rc = load_config(config)?;
    let mut cfg = rc.experiment()?;
    let mut rec = Recorder::new(out, "baseline", None, &rc)?;
    rec.input(config)?;
    let detunings: Vec<f64> = cfg.omega_p_scan.iter().map(|&w| cfg.detuning(w)).collect();
    if !thickness.is_empty() {
        let scan = optimize_thickness(&cfg, thickness, t1, t2)?;
        let mut csv = String::from("thickness_um,error\n");
        for (d, e) in scan.thickness_um.iter().zip(&scan.error) {
            csv.push_str(&format!("{d},{}\n", fmt17(*e)));
        }
        rec.write("thickness.csv", &csv)?;
        rec.note("best_thickness_um", scan.best_thickness_um);
        cfg.analyzer.b = thickness_param(scan.best_thickness_um, &cfg.nuclide)?;
    }
    rec.note("analyzer_b", cfg.analyzer.b);
    let spec = doppler_recover(&cfg, &detunings, t1, t2)?;
    write_spectrum(&mut rec, &spec, &cfg, rc.output.svg)?;
    rec.finish()?;
    Ok(())
}

pub fn sweep(config: &Path, method: Method, out: &Path, t1: &[f64], t2: &[f64]) -> std::result::Result<(), Failure> {
    let rc = load_config(config)?;
    let cfg = rc.experiment()?;
    warn_separation(&cfg);
    if method == Method::Phantasy && cfg.motion == MotionKind::Doppler {
        return Err(Error::Contract("phantasy sweep needs harmonic or PSSL motion".into()).into());
    }
    let (d1, d2) = default_sweep_axes();
    let t1 = if t1.is_empty() { d1 } else { t1.to_vec() };
    let t2 = if t2.is_empty() { d2 } else { t2.to_vec() };
    let mut rec = Recorder::new(out, "sweep", None, &rc)?;
    rec.input(config)?;
    let params = rc.filter_params(&cfg)?;
    let s = sweep_integration_with(&cfg, method, &params, &t1, &t2).map_err(|e| match e {
        Error::Domain(m) => Error::Config(m),
        other => other,
    })?;
    rec.write("sweep.csv", &sweep_csv(&s))?;
    rec.write("sweep_triples.csv", &sweep_triples_csv(&s))?;
    rec.write("sweep.json", &to_json(&s)?)?;
    if rc.output.svg {
        rec.write("sweep.svg", &svg_heatmap(&format!("{} error", method.name()), &s))?;
    }
    if let Some((a, b, e)) = s.min() {
        rec.note("minimum", serde_json::json!({ "t1_ns": a, "t2_ns": b, "error": e }));
    }
    rec.note("config_hash", &s.config_hash);
    rec.finish()?;
    Ok(())
}

pub fn selftest(grid: Option<&Path>) -> std::result::Result<(), Failure> {
    let loaded: Option<IntensityGrid> = grid.map(read_json).transpose()?;
    if let Some(g) = &loaded {
        check_grid(g)?;
    }
    let results = run_all(loaded.as_ref());
    let mut failed = Vec::new();
    for r in &results {
        println!("{} {:<28} {}", if r.passed { "PASS" } else { "FAIL" }, r.name, r.detail);
        if !r.passed {
            failed.push(r.name);
        }
    }
    if failed.is_empty() {
        println!("all {} checks passed", results.len());
        Ok(())
    } else {
        Err(Failure::Invariant(failed.join(", ")))
    }
}
