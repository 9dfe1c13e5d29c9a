//! Exact forward model of the detector field behind the moving analyzer and the target.
//!
//! Ê_D(ω) = R̂_T(ω)·[1 − Σ_j β_j R̂_S(ω − c_j)], c_j = S − shift_j. In time this is
//! E_D = R_T − Σ_j β_j G_j with G_j ↔ R̂_T(ω) R̂_S(ω − c_j). Each G_j is split into a part with a
//! closed-form transform (c₀ times the Bessel kernel, target poles times the analyzer pole)
//! and an O(1/ω³) remainder that is inverted by FFT on a grid sized for that sideband.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_unchecked, first_j0_zero};
use crate::error::{Error, Result};
use crate::filters::check_separation;
use crate::grid::{freq_to_time_in_place, ComplexSpectrum, FrequencyGrid, TimeGrid};
use crate::motion::{motion_phase_factor, truncation_order, MotionPattern, Sideband, DEFAULT_SIDEBAND_TOL};
use crate::response::{scattering_kernel, AnalyzerSpec, PolePair};
use crate::target::{target_response_time, target_support_halfwidth, TargetModel, TargetPreset};
use crate::units::NuclideConstants;

/// Support tolerance used when the scan half-width is derived from the target.
pub const SCAN_SUPPORT_EPS: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MotionKind {
    /// Harmonic oscillation with depth p; the scan axis holds ω_p.
    Harmonic,
    /// Step plus linear drift; the scan axis holds ω_p.
    Pssl,
    /// Constant velocity; the scan axis holds the Doppler detuning, φ₀ is irrelevant.
    Doppler,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeWindow {
    pub t_min_ns: f64,
    pub t_max_ns: f64,
    /// Sample spacing; chosen from the beat-note bandwidth when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt_ns: Option<f64>,
}

impl Default for TimeWindow {
    fn default() -> Self {
        Self { t_min_ns: 15.0, t_max_ns: 192.0, dt_ns: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub nuclide: NuclideConstants,
    pub analyzer: AnalyzerSpec,
    pub target: TargetModel,
    pub motion: MotionKind,
    /// Offset S between target and analyzer centers (γ).
    pub offset: f64,
    /// Modulation depth p (harmonic motion only).
    pub p: f64,
    pub omega_p_scan: Vec<f64>,
    pub phi0_count: usize,
    pub window: TimeWindow,
    pub sideband_tol: f64,
    /// Target support half-width l used for the scan and the filters (γ).
    pub support_halfwidth: f64,
    pub separation_ok: bool,
}

impl ExperimentConfig {
    /// Default experiment for a preset: l from the target, S = 6l, 161 points over S ± 1.2l,
    /// M = 32, p = p₀ and the [15, 192] ns window.
    pub fn for_preset(preset: TargetPreset, analyzer: AnalyzerSpec) -> Result<Self> {
        Self::for_target(preset.model(), analyzer)
    }

    pub fn for_target(target: TargetModel, analyzer: AnalyzerSpec) -> Result<Self> {
        let l = target_support_halfwidth(&target, SCAN_SUPPORT_EPS)?.max(1.0);
        let offset = 6.0 * l;
        let mut cfg = Self {
            nuclide: NuclideConstants::default(),
            analyzer,
            target,
            motion: MotionKind::Harmonic,
            offset,
            p: first_j0_zero(),
            omega_p_scan: linspace(offset - 1.2 * l, offset + 1.2 * l, 161),
            phi0_count: 32,
            window: TimeWindow::default(),
            sideband_tol: DEFAULT_SIDEBAND_TOL,
            support_halfwidth: l,
            separation_ok: false,
        };
        cfg.refresh();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Doppler-drive counterpart: stationary offset 0, scan over detunings covering the same Δ range.
    pub fn doppler_from(&self, points: usize) -> Self {
        let l = self.support_halfwidth;
        let mut cfg = Self {
            motion: MotionKind::Doppler,
            offset: 0.0,
            p: 0.0,
            omega_p_scan: linspace(-1.2 * l, 1.2 * l, points),
            phi0_count: 1,
            ..self.clone()
        };
        cfg.refresh();
        cfg
    }

    /// Recompute derived flags after editing fields.
    pub fn refresh(&mut self) {
        self.separation_ok = check_separation(self.offset, self.support_halfwidth).ok;
    }

    pub fn validate(&self) -> Result<()> {
        self.nuclide.validate()?;
        self.analyzer.validate()?;
        self.target.validate()?;
        let cfg_err = |m: String| Err(Error::Config(m));
        if !self.offset.is_finite() {
            return cfg_err("offset S must be finite".into());
        }
        if self.omega_p_scan.is_empty() || self.omega_p_scan.iter().any(|w| !w.is_finite()) {
            return cfg_err("scan axis must be non-empty and finite".into());
        }
        if self.omega_p_scan.windows(2).any(|w| w[1] <= w[0]) {
            return cfg_err("scan axis must be strictly ascending".into());
        }
        match self.motion {
            MotionKind::Harmonic | MotionKind::Pssl => {
                if self.omega_p_scan.iter().any(|&w| w <= 0.0) {
                    return cfg_err("omega_p values must be > 0".into());
                }
                if self.phi0_count < 8 || self.phi0_count % 2 != 0 {
                    return cfg_err(format!("phi0 count must be even and >= 8, got {}", self.phi0_count));
                }
            }
            MotionKind::Doppler => {
                if self.phi0_count == 0 {
                    return cfg_err("phi0 count must be >= 1".into());
                }
            }
        }
        if self.motion == MotionKind::Harmonic && !(self.p >= 0.0 && self.p.is_finite()) {
            return cfg_err(format!("modulation depth must be >= 0, got {}", self.p));
        }
        let w = &self.window;
        if !(w.t_min_ns >= 0.0 && w.t_min_ns < w.t_max_ns && w.t_max_ns.is_finite()) {
            return cfg_err(format!("invalid time window [{}, {}] ns", w.t_min_ns, w.t_max_ns));
        }
        if let Some(dt) = w.dt_ns {
            if !(dt > 0.0) {
                return cfg_err(format!("time step must be > 0, got {dt}"));
            }
        }
        let dt = self.resolved_dt_ns()?;
        for (name, t) in [("t_min", w.t_min_ns), ("t_max", w.t_max_ns)] {
            let r = t / dt;
            if (r - r.round()).abs() > 1e-9 {
                return cfg_err(format!("{name} = {t} ns is not a multiple of dt = {dt} ns"));
            }
        }
        if !(self.sideband_tol > 0.0 && self.sideband_tol <= 1e-4) {
            return cfg_err(format!("sideband tolerance must lie in (0, 1e-4], got {}", self.sideband_tol));
        }
        if !(self.support_halfwidth >= 0.0 && self.support_halfwidth.is_finite()) {
            return cfg_err("support half-width must be >= 0".into());
        }
        Ok(())
    }

    pub fn phi0_axis(&self) -> Vec<f64> {
        (0..self.phi0_count).map(|k| TAU * k as f64 / self.phi0_count as f64).collect()
    }

    pub fn motion_at(&self, phi0: f64, scan: f64) -> MotionPattern {
        match self.motion {
            MotionKind::Harmonic => MotionPattern::Harmonic { p: self.p, omega_p: scan, phi0 },
            MotionKind::Pssl => MotionPattern::Pssl { phi0, omega_p: scan },
            MotionKind::Doppler => MotionPattern::ConstantVelocity { detuning: scan },
        }
    }

    /// Δ probed by the scan point: the position of the shifted analyzer line.
    pub fn detuning(&self, scan: f64) -> f64 {
        self.offset + self.analyzer.resonance_offset - scan
    }

    /// Highest beat frequency with appreciable weight in the intensity.
    pub fn beat_bandwidth(&self) -> f64 {
        let scan_max = self.omega_p_scan.iter().fold(0.0f64, |m, w| m.max(w.abs()));
        let l = self.support_halfwidth;
        let base = self.offset.abs() + self.analyzer.resonance_offset.abs() + l + 10.0;
        match self.motion {
            MotionKind::Harmonic => {
                let mut k = 1;
                while k < 60 && (bessel_j_unchecked(k + 1, self.p) * bessel_j_unchecked(k, self.p)).abs() >= 2e-3 {
                    k += 1;
                }
                base + k as f64 * scan_max
            }
            MotionKind::Pssl | MotionKind::Doppler => base + scan_max,
        }
    }

    pub fn resolved_dt_ns(&self) -> Result<f64> {
        if let Some(dt) = self.window.dt_ns {
            return Ok(dt);
        }
        let nu = 1.1 * self.beat_bandwidth();
        let unit = self.nuclide.time_unit_ns();
        let mut dt = 1.0;
        while PI / (dt / unit) < nu {
            dt *= 0.5;
            if dt < 1e-4 {
                return Err(Error::Config("beat bandwidth too large for automatic time step".into()));
            }
        }
        Ok(dt)
    }

    /// Window sample grid in units of 1/γ.
    pub fn window_grid(&self) -> Result<TimeGrid> {
        let dt = self.resolved_dt_ns()?;
        let unit = self.nuclide.time_unit_ns();
        let n = ((self.window.t_max_ns - self.window.t_min_ns) / dt).round() as usize + 1;
        TimeGrid::new(self.window.t_min_ns / unit, dt / unit, n)
    }

    fn sidebands_at(&self, phi0: f64, scan: f64) -> Result<Vec<Sideband>> {
        self.motion_at(phi0, scan).sidebands(self.sideband_tol)
    }
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|k| a + (b - a) * k as f64 / (n - 1) as f64).collect(),
    }
}

/// Ê_D(ω) = R̂_T(ω) R̂_osc(ω − S) on `g`.
pub fn detector_field_freq(cfg: &ExperimentConfig, phi0: f64, scan: f64, g: &FrequencyGrid) -> Result<ComplexSpectrum> {
    let bands = cfg.sidebands_at(phi0, scan)?;
    let a = &cfg.analyzer;
    let reach = 50.0 * a.linewidth;
    for s in &bands {
        let c = cfg.offset - s.shift + a.resonance_offset;
        g.require_cover(c - reach, c + reach, "detector field")?;
    }
    let l = cfg.support_halfwidth;
    g.require_cover(-l, l, "target support")?;
    let shifted: Vec<(Complex64, AnalyzerSpec)> =
        bands.iter().map(|s| (s.weight, a.shifted(cfg.offset - s.shift))).collect();
    Ok(ComplexSpectrum::from_fn(*g, |w| {
        let osc = 1.0 - shifted.iter().map(|(b, s)| b * s.scattering_at(w)).sum::<Complex64>();
        cfg.target.response_at(w) * osc
    }))
}

/// Per-scan-point pieces: R_T and every G_j sampled on the window.
struct ScanFields {
    target: Vec<Complex64>,
    /// (order, G_j samples) in the order returned by the motion's sideband list.
    sidebands: Vec<(i32, Vec<Complex64>)>,
}

/// R_T(t) at window sample times (1/γ).
pub fn target_on_window(cfg: &ExperimentConfig, times: &[f64]) -> Result<Vec<Complex64>> {
    let m = &cfg.target;
    if !m.has_remainder() {
        let poles = m.poles();
        return Ok(times.iter().map(|&t| poles.iter().map(|p| p.time(t)).sum()).collect());
    }
    // exponential targets: reuse the FFT-based time response on a grid containing the window
    let dt_win = times.get(1).map_or(1e-3, |t| t - times[0]);
    let (m_fac, n) = fft_sizing(dt_win, 2.0 * (target_extent(m) + 512.0), decay_time(cfg, times));
    let dt = dt_win / m_fac as f64;
    let g = TimeGrid::new(-((n / 2) as f64) * dt, dt, n)?;
    let sig = target_response_time(m, &g)?;
    Ok(times.iter().map(|&t| sig.values[time_index(&g, t)]).collect())
}

fn target_extent(m: &TargetModel) -> f64 {
    m.poles().iter().map(|p| p.position.re.abs() + 20.0 * (-p.position.im)).fold(0.0, f64::max)
}

/// Record length so that wrap-around from t + T is negligible.
fn decay_time(cfg: &ExperimentConfig, times: &[f64]) -> f64 {
    let slowest = cfg
        .target
        .poles()
        .iter()
        .map(|p| -2.0 * p.position.im)
        .fold(cfg.analyzer.linewidth, f64::min);
    let t_max = times.last().copied().unwrap_or(0.0);
    // wrap-around from t + T is suppressed by e^{−14}
    (28.0 / slowest).max(2.0 * t_max + 1.0)
}

/// Oversampling factor m (power of two) and FFT length N for a window step and span.
fn fft_sizing(dt_win: f64, span: f64, record: f64) -> (usize, usize) {
    let mut m = 1usize;
    while TAU / (dt_win / m as f64) < span {
        m *= 2;
    }
    let dt = dt_win / m as f64;
    let n = ((record / dt).ceil() as usize).next_power_of_two().max(2);
    (m, n)
}

fn time_index(g: &TimeGrid, t: f64) -> usize {
    ((t - g.start) / g.spacing).round() as usize
}

/// Target-side factors of the remainder on one FFT grid: P_T(ω) and, for exponential
/// targets, the pole-pair plus O(1/ω³) part.
struct TargetSpectra {
    grid: FrequencyGrid,
    poles: Vec<Complex64>,
    higher: Option<Vec<Complex64>>,
}

/// Everything about the remainder FFTs that is fixed for a configuration.
struct Pipeline {
    dt_win: f64,
    record: f64,
    half_extent: f64,
    spectra: Vec<TargetSpectra>,
}

impl Pipeline {
    fn new(cfg: &ExperimentConfig, times: &[f64]) -> Result<Self> {
        let dt_win = times.get(1).map_or(1e-3, |t| t - times[0]);
        let m = &cfg.target;
        let widest = m.poles().iter().map(|p| -2.0 * p.position.im).fold(cfg.analyzer.linewidth, f64::max);
        let mut pipe = Self {
            dt_win,
            record: decay_time(cfg, times),
            half_extent: target_extent(m) + 256.0 + 50.0 * widest,
            spectra: Vec::new(),
        };
        let mut sizes: Vec<(usize, usize)> = Vec::new();
        for &scan in &cfg.omega_p_scan {
            for s in cfg.sidebands_at(0.0, scan)? {
                let size = pipe.sizing(cfg.offset - s.shift + cfg.analyzer.resonance_offset);
                if !sizes.contains(&size) {
                    sizes.push(size);
                }
            }
        }
        let poles = m.poles();
        let pairs = m.pole_pairs();
        for (mf, n) in sizes {
            let grid = FrequencyGrid::new(0.0, TAU / (n as f64 * dt_win / mf as f64), n)?;
            let omegas = grid.omegas();
            let pt = omegas.iter().map(|&w| poles.iter().map(|p| p.freq(w)).sum()).collect();
            let higher = m.has_remainder().then(|| {
                omegas
                    .iter()
                    .map(|&w| pairs.iter().map(|pp| pp.freq(w)).sum::<Complex64>() + m.remainder_at(w))
                    .collect()
            });
            pipe.spectra.push(TargetSpectra { grid, poles: pt, higher });
        }
        Ok(pipe)
    }

    fn sizing(&self, analyzer_center: f64) -> (usize, usize) {
        let half = analyzer_center.abs() + self.half_extent;
        fft_sizing(self.dt_win, 2.0 * half, self.record)
    }

    fn spectra_for(&self, analyzer_center: f64) -> &TargetSpectra {
        let (mf, n) = self.sizing(analyzer_center);
        let dw = TAU / (n as f64 * self.dt_win / mf as f64);
        self.spectra
            .iter()
            .find(|s| s.grid.count == n && (s.grid.spacing - dw).abs() <= 1e-12 * dw)
            .expect("spectra prepared for every sideband")
    }
}

fn scan_fields(cfg: &ExperimentConfig, pipe: &Pipeline, scan: f64, times: &[f64], target: &[Complex64]) -> Result<ScanFields> {
    let bands = cfg.sidebands_at(0.0, scan)?;
    let m = &cfg.target;
    let c0 = m.c0();
    let poles = m.poles();
    let a = &cfg.analyzer;
    let mut out = Vec::with_capacity(bands.len());
    let mut buf: Vec<Complex64> = Vec::new();
    for s in &bands {
        let an = a.shifted(cfg.offset - s.shift);
        let q = an.pole();
        let link: Vec<PolePair> = poles
            .iter()
            .map(|p| PolePair { coefficient: p.residue * Complex64::new(0.0, an.b), first: p.position, second: q })
            .collect();
        let mut g: Vec<Complex64> = times
            .iter()
            .map(|&t| {
                let direct = if c0 == Complex64::new(0.0, 0.0) { c0 } else { c0 * an.scattering_time_at(t) };
                direct + link.iter().map(|pp| pp.time(t)).sum::<Complex64>()
            })
            .collect();
        if an.b > 0.0 {
            let ts = pipe.spectra_for(an.resonance_offset);
            let fg = ts.grid;
            buf.clear();
            match &ts.higher {
                None => buf.extend(
                    (0..fg.count).map(|k| ts.poles[k] * an.scattering_remainder_at(fg.omega(k))),
                ),
                Some(h) => buf.extend((0..fg.count).map(|k| {
                    let w = fg.omega(k);
                    ts.poles[k] * an.scattering_remainder_at(w) + h[k] * an.scattering_at(w)
                })),
            }
            freq_to_time_in_place(&fg, &mut buf);
            let tg = fg.dual();
            for (v, &t) in g.iter_mut().zip(times) {
                *v += buf[time_index(&tg, t)];
            }
        }
        out.push((s.order, g));
    }
    Ok(ScanFields { target: target.to_vec(), sidebands: out })
}

fn combine(fields: &ScanFields, bands: &[Sideband]) -> Vec<Complex64> {
    let mut e = fields.target.clone();
    for (s, (order, g)) in bands.iter().zip(&fields.sidebands) {
        debug_assert_eq!(s.order, *order);
        for (v, x) in e.iter_mut().zip(g) {
            *v -= s.weight * x;
        }
    }
    e
}

/// E_D(t) on the window samples for one (φ₀, scan) cell, via the FFT pipeline.
pub fn detector_field_time(cfg: &ExperimentConfig, phi0: f64, scan: f64) -> Result<Vec<Complex64>> {
    let times = cfg.window_grid()?.times();
    let target = target_on_window(cfg, &times)?;
    let single = ExperimentConfig { omega_p_scan: vec![scan], ..cfg.clone() };
    let pipe = Pipeline::new(&single, &times)?;
    let fields = scan_fields(cfg, &pipe, scan, &times, &target)?;
    Ok(combine(&fields, &cfg.sidebands_at(phi0, scan)?))
}

/// Per-order scattered fields G_j(t) on the window samples (unit weights) for one scan point.
pub fn sideband_fields(cfg: &ExperimentConfig, scan: f64) -> Result<Vec<(i32, Vec<Complex64>)>> {
    let times = cfg.window_grid()?.times();
    let target = target_on_window(cfg, &times)?;
    let single = ExperimentConfig { omega_p_scan: vec![scan], ..cfg.clone() };
    let pipe = Pipeline::new(&single, &times)?;
    Ok(scan_fields(cfg, &pipe, scan, &times, &target)?.sidebands)
}

/// Direct time-domain evaluation of E_D at `times` (Rational targets only):
/// E_D(t) = R_T(t) − c₀ e^{−iSt} ψ(t) R_S(t) − ∫₀ᵗ R_T(t − s) e^{−iSs} ψ(s) R_S(s) ds,
/// with the exact motion factor ψ and Romberg quadrature.
pub fn detector_field_time_oracle(cfg: &ExperimentConfig, phi0: f64, scan: f64, times: &[f64]) -> Result<Vec<Complex64>> {
    let TargetModel::Rational { c0, .. } = &cfg.target else {
        return Err(Error::Domain("time-domain oracle supports rational targets only".into()));
    };
    let c0 = *c0;
    let poles = cfg.target.poles();
    let motion = cfg.motion_at(phi0, scan);
    motion.validate()?;
    let a = cfg.analyzer;
    let s_off = cfg.offset;
    let target = |t: f64| -> Complex64 {
        poles.iter().map(|p| -Complex64::i() * p.residue * (-Complex64::i() * p.position * t).exp()).sum()
    };
    let h = |s: f64| -> Complex64 {
        let phase = motion_phase_factor(&motion, if s == 0.0 { 1e-300 } else { s });
        let env = (-Complex64::i() * (a.pole() + s_off) * s).exp();
        phase * env * scattering_kernel(a.b, s)
    };
    Ok(times
        .iter()
        .map(|&t| {
            let conv = romberg(|s| target(t - s) * h(s), 0.0, t, 1e-13);
            target(t) - c0 * h(t) - conv
        })
        .collect())
}

fn romberg(f: impl Fn(f64) -> Complex64, a: f64, b: f64, rtol: f64) -> Complex64 {
    if b <= a {
        return Complex64::new(0.0, 0.0);
    }
    let mut n = 256usize;
    let mut h = (b - a) / n as f64;
    let mut sum = 0.5 * (f(a) + f(b)) + (1..n).map(|k| f(a + k as f64 * h)).sum::<Complex64>();
    let mut rows: Vec<Vec<Complex64>> = vec![vec![sum * h]];
    for level in 1..14 {
        let mid: Complex64 = (0..n).map(|k| f(a + (k as f64 + 0.5) * h)).sum();
        sum += mid;
        n *= 2;
        h *= 0.5;
        let mut row = vec![sum * h];
        let mut pow = 1.0;
        for j in 1..=level {
            pow *= 4.0;
            let prev = rows[level - 1][j - 1];
            let cur = row[j - 1];
            row.push(cur + (cur - prev) / (pow - 1.0));
        }
        let best = row[level];
        let last = rows[level - 1][level - 1];
        rows.push(row);
        if level >= 3 && (best - last).norm() <= rtol * best.norm().max(1e-300) {
            return best;
        }
    }
    let last = rows.last().unwrap();
    last[last.len() - 1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityGrid {
    /// Window samples in units of 1/γ.
    pub time: TimeGrid,
    pub phi0: Vec<f64>,
    pub omega_p: Vec<f64>,
    /// values[(i_scan · M + i_phi) · N_t + i_t]
    pub values: Vec<f64>,
    pub meta: ExperimentConfig,
}

impl IntensityGrid {
    pub fn new(time: TimeGrid, phi0: Vec<f64>, omega_p: Vec<f64>, values: Vec<f64>, meta: ExperimentConfig) -> Result<Self> {
        let want = time.count * phi0.len() * omega_p.len();
        if values.len() != want {
            return Err(Error::GridMismatch(format!("{} values for axes of total size {want}", values.len())));
        }
        if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Domain("intensity values must be finite and non-negative".into()));
        }
        Ok(Self { time, phi0, omega_p, values, meta })
    }

    pub fn index(&self, i_scan: usize, i_phi: usize, i_t: usize) -> usize {
        (i_scan * self.phi0.len() + i_phi) * self.time.count + i_t
    }

    pub fn at(&self, i_scan: usize, i_phi: usize, i_t: usize) -> f64 {
        self.values[self.index(i_scan, i_phi, i_t)]
    }

    /// Samples for one (scan, φ₀) cell.
    pub fn trace(&self, i_scan: usize, i_phi: usize) -> &[f64] {
        let start = self.index(i_scan, i_phi, 0);
        &self.values[start..start + self.time.count]
    }

    pub fn times_ns(&self) -> Vec<f64> {
        let unit = self.meta.nuclide.time_unit_ns();
        self.time.times().into_iter().map(|t| t * unit).collect()
    }

    /// Restrict the time axis to [t_lo, t_hi] (ns, inclusive up to rounding).
    pub fn windowed(&self, t_lo_ns: f64, t_hi_ns: f64) -> Result<Self> {
        let ts = self.times_ns();
        let tol = 1e-9 * self.time.spacing * self.meta.nuclide.time_unit_ns();
        let keep: Vec<usize> = (0..ts.len()).filter(|&i| ts[i] >= t_lo_ns - tol && ts[i] <= t_hi_ns + tol).collect();
        if keep.is_empty() {
            return Err(Error::Domain(format!("window [{t_lo_ns}, {t_hi_ns}] ns holds no samples")));
        }
        let time = TimeGrid::new(self.time.time(keep[0]), self.time.spacing, keep.len())?;
        let mut values = Vec::with_capacity(keep.len() * self.phi0.len() * self.omega_p.len());
        for i in 0..self.omega_p.len() {
            for k in 0..self.phi0.len() {
                let tr = self.trace(i, k);
                values.extend(keep.iter().map(|&j| tr[j]));
            }
        }
        Ok(Self { time, phi0: self.phi0.clone(), omega_p: self.omega_p.clone(), values, meta: self.meta.clone() })
    }
}

/// Full (t, φ₀, scan) intensity |E_D|² on the configured window.
pub fn detector_intensity(cfg: &ExperimentConfig) -> Result<IntensityGrid> {
    cfg.validate()?;
    let grid = cfg.window_grid()?;
    let times = grid.times();
    let target = target_on_window(cfg, &times)?;
    let pipe = Pipeline::new(cfg, &times)?;
    let phis = cfg.phi0_axis();
    let slices: Vec<Result<Vec<f64>>> = cfg
        .omega_p_scan
        .par_iter()
        .map(|&scan| {
            let fields = scan_fields(cfg, &pipe, scan, &times, &target)?;
            let mut out = Vec::with_capacity(phis.len() * times.len());
            for &phi in &phis {
                let e = combine(&fields, &cfg.sidebands_at(phi, scan)?);
                out.extend(e.iter().map(|v| v.norm_sqr()));
            }
            Ok(out)
        })
        .collect();
    let mut values = Vec::with_capacity(phis.len() * times.len() * cfg.omega_p_scan.len());
    for s in slices {
        values.extend(s?);
    }
    IntensityGrid::new(grid, phis, cfg.omega_p_scan.clone(), values, cfg.clone())
}

/// Relative L2 distance between the FFT pipeline and the time-domain oracle for one cell,
/// evaluated on every `stride`-th window sample.
pub fn oracle_spot_check(cfg: &ExperimentConfig, phi0: f64, scan: f64, stride: usize) -> Result<f64> {
    let times: Vec<f64> = cfg.window_grid()?.times().into_iter().step_by(stride.max(1)).collect();
    let all = detector_field_time(cfg, phi0, scan)?;
    let pipe: Vec<Complex64> = all.into_iter().step_by(stride.max(1)).collect();
    let oracle = detector_field_time_oracle(cfg, phi0, scan, &times)?;
    Ok(crate::cmath::relative_l2(&pipe, &oracle))
}

/// Sideband order range that the simulator retains for the configured depth.
pub fn retained_orders(cfg: &ExperimentConfig) -> Result<u32> {
    match cfg.motion {
        MotionKind::Harmonic => truncation_order(cfg.p, cfg.sideband_tol),
        _ => Ok(0),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filters::phi0_fourier;

    fn small(b: f64, points: usize) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(b).unwrap()).unwrap();
        let l = cfg.support_halfwidth;
        cfg.omega_p_scan = linspace(cfg.offset - l, cfg.offset + l, points);
        cfg
    }

    #[test]
    fn zero_thickness_passes_the_target() {
        let cfg = small(0.0, 3);
        let g = detector_intensity(&cfg).unwrap();
        let target: Vec<f64> = target_on_window(&cfg, &g.time.times()).unwrap().iter().map(|v| v.norm_sqr()).collect();
        let top = target.iter().copied().fold(0.0, f64::max);
        for i in 0..3 {
            for k in 0..cfg.phi0_count {
                for (v, t) in g.trace(i, k).iter().zip(&target) {
                    assert!((v - t).abs() <= 1e-12 * top);
                }
            }
        }
    }

    #[test]
    fn zero_depth_is_phase_independent() {
        let mut cfg = small(0.5, 2);
        cfg.p = 0.0;
        let g = detector_intensity(&cfg).unwrap();
        for i in 0..2 {
            let first = g.trace(i, 0);
            let top = first.iter().copied().fold(0.0, f64::max);
            for k in 1..cfg.phi0_count {
                assert!(g.trace(i, k).iter().zip(first).all(|(a, b)| (a - b).abs() <= 1e-12 * top));
            }
        }
    }

    #[test]
    fn phase_average_is_the_dc_component() {
        let cfg = small(0.5, 2);
        let g = detector_intensity(&cfg).unwrap();
        let comps = phi0_fourier(&g, 1).unwrap();
        for i in 0..2 {
            let dc = comps.slice(0, i).unwrap();
            for j in 0..g.time.count {
                let mean = (0..cfg.phi0_count).map(|k| g.at(i, k, j)).sum::<f64>() / cfg.phi0_count as f64;
                assert!((dc[j].re - mean).abs() <= 1e-10 * mean.max(1e-300) && dc[j].im.abs() <= 1e-10 * mean.max(1e-300));
            }
        }
    }

    #[test]
    fn resonant_drive_absorbs_most() {
        let cfg = small(1.0, 3).doppler_from(3);
        let g = detector_intensity(&cfg).unwrap();
        let target: Vec<f64> = target_on_window(&cfg, &g.time.times()).unwrap().iter().map(|v| v.norm_sqr()).collect();
        let change = |i: usize| g.trace(i, 0).iter().zip(&target).map(|(v, t)| (v - t).abs()).sum::<f64>();
        assert!(change(1) > change(0) && change(1) > change(2));
    }

    #[test]
    fn windowing_is_idempotent() {
        let g = detector_intensity(&small(0.5, 2)).unwrap();
        let w = g.windowed(30.0, 100.0).unwrap();
        assert_eq!(w.windowed(30.0, 100.0).unwrap(), w);
        let ts = g.times_ns();
        let j0 = ts.iter().position(|&t| t >= 30.0 - 1e-9).unwrap();
        assert_eq!(w.trace(1, 3), &g.trace(1, 3)[j0..j0 + w.time.count]);
        assert!(g.values.iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn invalid_grid_is_rejected() {
        let g = detector_intensity(&small(0.5, 1)).unwrap();
        let mut v = g.values.clone();
        v.pop();
        assert!(matches!(
            IntensityGrid::new(g.time, g.phi0.clone(), g.omega_p.clone(), v, g.meta.clone()),
            Err(Error::GridMismatch(_))
        ));
    }
}
