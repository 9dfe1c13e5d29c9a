//! Sensing-head predictions, cosine fits over φ₀ and spectrum reconstruction.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::bessel_j_unchecked;
use crate::error::{Error, Result};
use crate::filters::FilteredSignal;
use crate::grid::TimeGrid;
use crate::response::AnalyzerSpec;
use crate::simulate::{detector_intensity, sideband_fields, target_on_window, ExperimentConfig, MotionKind};
use crate::target::target_group_delay;

/// Sensing-head quantities for one scan point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensingHeadTerms {
    /// Δ = S + ω_a − ω_p, the target frequency probed by the first sideband (γ).
    pub detuning: f64,
    /// Group delay τ₁ (1/γ); zero when the phase is undefined.
    pub tau1: f64,
    /// C = |R̂_T(Δ)|.
    pub amplitude: f64,
    /// arg R̂_T(Δ).
    pub phase: f64,
    /// False when |R̂_T(Δ)| is below the phase-definedness floor.
    pub phase_defined: bool,
}

impl SensingHeadTerms {
    pub fn new(cfg: &ExperimentConfig, scan: f64) -> Self {
        let detuning = cfg.detuning(scan);
        let r = cfg.target.response_at(detuning);
        let (tau1, phase_defined) = match target_group_delay(&cfg.target, detuning) {
            Ok(t) => (t, true),
            Err(_) => (0.0, false),
        };
        Self { detuning, tau1, amplitude: r.norm(), phase: r.arg(), phase_defined }
    }
}

/// Centred analyzer kernel |R_S(t)|·sign: √(b/t) J₁(2√(bt)) e^{−γ_a t/2}.
fn analyzer_kernel(a: &AnalyzerSpec, t: f64) -> f64 {
    AnalyzerSpec { resonance_offset: 0.0, ..*a }.scattering_time_at(t).re
}

/// Y(t) = R_T*(t) R̂_T(Δ) R_S⁰(t − τ₁) e^{−iΔt} on the window samples.
fn single_sideband_product(cfg: &ExperimentConfig, scan: f64, times: &[f64], target: &[Complex64]) -> Vec<Complex64> {
    let h = SensingHeadTerms::new(cfg, scan);
    let r_hat = cfg.target.response_at(h.detuning);
    times
        .iter()
        .zip(target)
        .map(|(&t, rt)| rt.conj() * r_hat * analyzer_kernel(&cfg.analyzer, t - h.tau1) * Complex64::from_polar(1.0, -h.detuning * t))
        .collect()
}

/// Weight of the f = ±1 part of the first-order sideband amplitude.
fn sideband_coefficient(cfg: &ExperimentConfig, phi0: f64) -> Result<Complex64> {
    match cfg.motion {
        MotionKind::Harmonic => {
            let (j0, j1, j2) = (bessel_j_unchecked(0, cfg.p), bessel_j_unchecked(1, cfg.p), bessel_j_unchecked(2, cfg.p));
            Ok(j1 * (j2 * Complex64::from_polar(1.0, -phi0) + j0 * Complex64::from_polar(1.0, phi0)))
        }
        MotionKind::Pssl => Ok(Complex64::from_polar(1.0, phi0)),
        MotionKind::Doppler => Err(Error::Contract("sideband prediction needs harmonic or PSSL motion".into())),
    }
}

/// Filtered signal predicted by the sensing-head approximation on the window samples.
///
/// Harmonic motion: Ī_D = −2 Re{J₁(p)[J₂(p)e^{−iφ₀} + J₀(p)e^{iφ₀}] Y(t)};
/// PSSL motion: Ī_D = −2 Re{e^{iφ₀} Y(t)}.
pub fn sensing_head_predict(cfg: &ExperimentConfig, phi0: f64, scan: f64) -> Result<Vec<f64>> {
    let coef = sideband_coefficient(cfg, phi0)?;
    let times = cfg.window_grid()?.times();
    let target = target_on_window(cfg, &times)?;
    let y = single_sideband_product(cfg, scan, &times, &target);
    Ok(y.iter().map(|v| -2.0 * (coef * v).re).collect())
}

/// Same product as [`sensing_head_predict`] with the exact first-order scattered field G₁(t)
/// in place of R̂_T(Δ) R_S⁰(t − τ₁) e^{−iΔt}.
pub fn single_sideband_exact(cfg: &ExperimentConfig, phi0: f64, scan: f64) -> Result<Vec<f64>> {
    let coef = sideband_coefficient(cfg, phi0)?;
    let times = cfg.window_grid()?.times();
    let target = target_on_window(cfg, &times)?;
    let fields = sideband_fields(cfg, scan)?;
    let g1 = fields
        .iter()
        .find(|(n, _)| *n == 1)
        .map(|(_, g)| g)
        .ok_or_else(|| Error::Domain("first-order sideband not retained".into()))?;
    Ok(target.iter().zip(g1).map(|(rt, g)| -2.0 * (coef * rt.conj() * g).re).collect())
}

/// Envelope B(t, τ₁) = 2|J₁(p)J₂(p)| |R_S(t − τ₁)| |R_T(t)| on the window samples.
pub fn sensing_head_envelope(cfg: &ExperimentConfig, scan: f64) -> Result<Vec<f64>> {
    let times = cfg.window_grid()?.times();
    let target = target_on_window(cfg, &times)?;
    let h = SensingHeadTerms::new(cfg, scan);
    let k = 2.0 * (bessel_j_unchecked(1, cfg.p) * bessel_j_unchecked(2, cfg.p)).abs();
    Ok(times.iter().zip(&target).map(|(&t, r)| k * analyzer_kernel(&cfg.analyzer, t - h.tau1).abs() * r.norm()).collect())
}

/// D cos(φ₀ + a) fitted per (ω_p, t); arrays indexed i_scan · n_t + i_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub time: TimeGrid,
    pub omega_p: Vec<f64>,
    pub d: Vec<f64>,
    pub a: Vec<f64>,
    pub residual: Vec<f64>,
    pub meta: ExperimentConfig,
}

impl FitResult {
    pub fn index(&self, i_scan: usize, i_t: usize) -> usize {
        i_scan * self.time.count + i_t
    }

    pub fn times_ns(&self) -> Vec<f64> {
        let unit = self.meta.nuclide.time_unit_ns();
        self.time.times().into_iter().map(|t| t * unit).collect()
    }
}

/// First-harmonic projection: D e^{−ia} = (2/M) Σ g(φ₀_k) e^{+iφ₀_k}; returns (D, a, RMS residual).
pub fn fit_cosine(phis: &[f64], values: &[f64]) -> Result<(f64, f64, f64)> {
    let m = phis.len();
    if m < 3 || values.len() != m {
        return Err(Error::Domain(format!("cosine fit needs >= 3 phases, got {m}")));
    }
    let z: Complex64 = phis.iter().zip(values).map(|(&p, &v)| v * Complex64::from_polar(1.0, p)).sum::<Complex64>()
        * (2.0 / m as f64);
    let d = z.norm();
    let a = if d > 0.0 { (-z.arg()).rem_euclid(TAU) } else { 0.0 };
    let rss: f64 = phis.iter().zip(values).map(|(&p, &v)| (v - d * (p + a).cos()).powi(2)).sum();
    Ok((d, a, (rss / m as f64).sqrt()))
}

pub fn cosine_fit(fs: &FilteredSignal) -> Result<FitResult> {
    let m = fs.phi0.len();
    if m < 3 {
        return Err(Error::Domain(format!("cosine fit needs >= 3 phases, got {m}")));
    }
    let n_t = fs.time.count;
    let n = fs.omega_p.len() * n_t;
    let (mut d, mut a, mut residual) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    let mut column = vec![0.0; m];
    for i in 0..fs.omega_p.len() {
        for j in 0..n_t {
            for (k, c) in column.iter_mut().enumerate() {
                *c = fs.trace(i, k)[j];
            }
            let (dd, aa, rr) = fit_cosine(&fs.phi0, &column)?;
            d.push(dd);
            a.push(aa);
            residual.push(rr);
        }
    }
    Ok(FitResult { time: fs.time, omega_p: fs.omega_p.clone(), d, a, residual, meta: fs.meta.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Phantasy,
    Doppler,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Phantasy => "phantasy",
            Method::Doppler => "doppler",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredSpectrum {
    /// Ascending detuning axis Δ (γ).
    pub detuning: Vec<f64>,
    /// Recovered |R̂_T|², maximum 1.
    pub amplitude_sq: Vec<f64>,
    /// Recovered arg R̂_T up to a global constant, in [0, 2π).
    pub phase: Option<Vec<f64>>,
    pub window_ns: (f64, f64),
    pub method: Method,
    /// Time samples or cells left out (all-zero slices, D below the floor).
    pub excluded: usize,
}

/// Default D floor for the phase average, relative to the per-ω_p maximum.
pub const D_FLOOR: f64 = 1e-3;

fn window_indices(fit: &FitResult, t1_ns: f64, t2_ns: f64) -> Result<Vec<usize>> {
    let ts = fit.times_ns();
    let tol = 1e-9 * (ts.get(1).copied().unwrap_or(1.0) - ts[0]).abs();
    if !(t1_ns < t2_ns) {
        return Err(Error::Domain(format!("t1 = {t1_ns} ns must be smaller than t2 = {t2_ns} ns")));
    }
    if t1_ns < ts[0] - tol || t2_ns > ts[ts.len() - 1] + tol {
        return Err(Error::Domain(format!(
            "[{t1_ns}, {t2_ns}] ns is outside the simulated window [{}, {}] ns",
            ts[0],
            ts[ts.len() - 1]
        )));
    }
    let idx: Vec<usize> = (0..ts.len()).filter(|&j| ts[j] >= t1_ns - tol && ts[j] <= t2_ns + tol).collect();
    if idx.len() < 3 {
        return Err(Error::Domain(format!("[{t1_ns}, {t2_ns}] ns holds fewer than 3 samples")));
    }
    Ok(idx)
}

/// Scan order mapped to ascending Δ.
fn ascending(fit: &FitResult) -> (Vec<f64>, Vec<usize>) {
    let mut order: Vec<usize> = (0..fit.omega_p.len()).collect();
    order.sort_by(|&x, &y| fit.meta.detuning(fit.omega_p[x]).total_cmp(&fit.meta.detuning(fit.omega_p[y])));
    (order.iter().map(|&i| fit.meta.detuning(fit.omega_p[i])).collect(), order)
}

/// Per-t max normalisation of D over ω_p, squaring, average over t, rescale to max 1.
pub fn recover_amplitude(fit: &FitResult, t1_ns: f64, t2_ns: f64) -> Result<RecoveredSpectrum> {
    let idx = window_indices(fit, t1_ns, t2_ns)?;
    let (detuning, order) = ascending(fit);
    let mut acc = vec![0.0; order.len()];
    let mut excluded = 0;
    let mut used = 0;
    for &j in &idx {
        let peak = order.iter().map(|&i| fit.d[fit.index(i, j)]).fold(0.0, f64::max);
        if !(peak > 0.0) {
            excluded += 1;
            continue;
        }
        used += 1;
        for (s, &i) in acc.iter_mut().zip(&order) {
            *s += (fit.d[fit.index(i, j)] / peak).powi(2);
        }
    }
    if used > 0 {
        let top = acc.iter().copied().fold(0.0, f64::max);
        for v in &mut acc {
            *v /= top;
        }
    }
    Ok(RecoveredSpectrum {
        detuning,
        amplitude_sq: acc,
        phase: None,
        window_ns: (t1_ns, t2_ns),
        method: Method::Phantasy,
        excluded,
    })
}

/// Of θ and θ + π, the value closest to `prev` on the circle (ties go to θ).
fn nearest_branch(theta: f64, prev: f64) -> f64 {
    let dist = |x: f64| ((x - prev + PI).rem_euclid(TAU) - PI).abs();
    let alt = theta + PI;
    if dist(alt) < dist(theta) {
        alt
    } else {
        theta
    }
}

/// Spectral phase from the fitted a: â = Δ·t ∓ a per cell, π-branch continuity along ω_p, each
/// time row aligned to a common reference, then a circular mean over t.
///
/// Harmonic motion carries the target phase on the e^{−iφ₀} harmonic (through J₁J₂), so â = Δt − a;
/// PSSL motion carries it on e^{+iφ₀} and â = Δt + a.
pub fn recover_phase(fit: &FitResult, t1_ns: f64, t2_ns: f64) -> Result<RecoveredSpectrum> {
    let mut rec = recover_amplitude(fit, t1_ns, t2_ns)?;
    let idx = window_indices(fit, t1_ns, t2_ns)?;
    let (detuning, order) = ascending(fit);
    let n = order.len();
    let sign = match fit.meta.motion {
        MotionKind::Harmonic => -1.0,
        MotionKind::Pssl => 1.0,
        MotionKind::Doppler => {
            return Err(Error::Contract("phase recovery needs harmonic or PSSL motion".into()));
        }
    };
    let col_max: Vec<f64> =
        order.iter().map(|&i| idx.iter().map(|&j| fit.d[fit.index(i, j)]).fold(0.0, f64::max)).collect();
    // rows[r][k]: unit phasor (zero when excluded) for time idx[r], ascending Δ index k
    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(idx.len());
    let mut excluded = 0;
    for &j in &idx {
        let t = fit.time.time(j);
        let mut prev: Option<f64> = None;
        let mut row = vec![Complex64::new(0.0, 0.0); n];
        for (k, &i) in order.iter().enumerate() {
            let c = fit.index(i, j);
            if !(fit.d[c] >= D_FLOOR * col_max[k]) || col_max[k] == 0.0 {
                excluded += 1;
                continue;
            }
            let raw = detuning[k] * t + sign * fit.a[c];
            let theta = match prev {
                Some(p) => nearest_branch(raw, p),
                None => raw,
            };
            prev = Some(theta);
            row[k] = Complex64::from_polar(1.0, theta);
        }
        rows.push(row);
    }
    // reference: the row sum, refined once after alignment
    let mut reference: Vec<Complex64> = (0..n).map(|k| rows.iter().map(|r| r[k]).sum()).collect();
    for _ in 0..3 {
        for row in rows.iter_mut() {
            let overlap: Complex64 = row.iter().zip(&reference).map(|(u, v)| u * v.conj()).sum();
            if overlap.norm() > 0.0 {
                let rot = (overlap / overlap.norm()).conj();
                for u in row.iter_mut() {
                    *u *= rot;
                }
            }
        }
        reference = (0..n).map(|k| rows.iter().map(|r| r[k]).sum()).collect();
    }
    rec.phase = Some(reference.iter().map(|z| z.arg().rem_euclid(TAU)).collect());
    rec.excluded += excluded;
    Ok(rec)
}

/// Doppler-drive baseline: constant-velocity analyzer at each Δ, |E_D|² integrated over
/// [t₁, t₂] and turned into an absorption depth rescaled to [0, 1]. A flat count gives a flat
/// curve of ones, the max-normalized form of a featureless spectrum.
pub fn doppler_recover(cfg: &ExperimentConfig, detunings: &[f64], t1_ns: f64, t2_ns: f64) -> Result<RecoveredSpectrum> {
    let grid = doppler_intensity(cfg, detunings)?;
    doppler_from_grid(&grid, t1_ns, t2_ns)
}

/// Exact intensity for the Doppler drive at the given detunings (any order).
pub fn doppler_intensity(cfg: &ExperimentConfig, detunings: &[f64]) -> Result<crate::simulate::IntensityGrid> {
    let mut scan: Vec<f64> = detunings.iter().map(|d| cfg.offset + cfg.analyzer.resonance_offset - d).collect();
    scan.sort_by(f64::total_cmp);
    scan.dedup();
    let mut d = ExperimentConfig { motion: MotionKind::Doppler, p: 0.0, omega_p_scan: scan, phi0_count: 1, ..cfg.clone() };
    d.refresh();
    detector_intensity(&d)
}

/// Baseline spectrum from a Doppler-drive intensity grid.
pub fn doppler_from_grid(grid: &crate::simulate::IntensityGrid, t1_ns: f64, t2_ns: f64) -> Result<RecoveredSpectrum> {
    if grid.meta.motion != MotionKind::Doppler {
        return Err(Error::Contract("doppler recovery needs a constant-velocity intensity grid".into()));
    }
    let ts = grid.times_ns();
    let tol = 1e-9 * grid.time.spacing * grid.meta.nuclide.time_unit_ns();
    if !(t1_ns < t2_ns) {
        return Err(Error::Domain(format!("t1 = {t1_ns} ns must be smaller than t2 = {t2_ns} ns")));
    }
    let idx: Vec<usize> = (0..ts.len()).filter(|&j| ts[j] >= t1_ns - tol && ts[j] <= t2_ns + tol).collect();
    if idx.len() < 2 {
        return Err(Error::Domain(format!("[{t1_ns}, {t2_ns}] ns holds fewer than 2 samples")));
    }
    let mut pairs: Vec<(f64, f64)> = (0..grid.omega_p.len())
        .map(|i| {
            let tr = grid.trace(i, 0);
            // trapezoid over the selected samples
            let mut s = 0.0;
            for w in idx.windows(2) {
                s += 0.5 * (tr[w[0]] + tr[w[1]]);
            }
            (grid.meta.detuning(grid.omega_p[i]), s * grid.time.spacing)
        })
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let lo = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let hi = pairs.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let flat = !(hi - lo > 1e-12 * hi.abs().max(1e-300));
    Ok(RecoveredSpectrum {
        detuning: pairs.iter().map(|p| p.0).collect(),
        amplitude_sq: pairs.iter().map(|p| if flat { 1.0 } else { (hi - p.1) / (hi - lo) }).collect(),
        phase: None,
        window_ns: (t1_ns, t2_ns),
        method: Method::Doppler,
        excluded: 0,
    })
}
