//! φ₀-Fourier filter, t-filter and their combination into the single-sideband signal.
//!
//! Conventions: I(φ₀) = Σ_f I^f e^{−ifφ₀}, so I^f = (1/M) Σ_k I(φ₀_k) e^{+ifφ₀_k}; a time
//! signal e^{−iνt} sits at frequency ν.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{plan_forward, plan_inverse, TimeGrid};
use crate::simulate::{ExperimentConfig, IntensityGrid};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub ok: bool,
    /// Worst-case gap |3ω_p − 2S| − 2l at ω_p = S − l (γ).
    pub margin: f64,
}

/// S > 5l, or S > 0 for a degenerate support l = 0.
pub fn check_separation(s: f64, l: f64) -> SeparationReport {
    let omega_p = s - l;
    let margin = (3.0 * omega_p - 2.0 * s).abs() - 2.0 * l;
    let ok = if l == 0.0 { s > 0.0 } else { s > 5.0 * l };
    SeparationReport { ok, margin }
}

/// I^f over (f, ω_p, t); index (i_f · n_scan + i_scan) · n_t + i_t.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhiComponents {
    pub f_values: Vec<i32>,
    pub time: TimeGrid,
    pub omega_p: Vec<f64>,
    pub components: Vec<Complex64>,
    pub meta: ExperimentConfig,
}

impl PhiComponents {
    pub fn position(&self, f: i32) -> Option<usize> {
        self.f_values.iter().position(|&g| g == f)
    }

    /// I^f(t) at one scan point.
    pub fn slice(&self, f: i32, i_scan: usize) -> Option<&[Complex64]> {
        let i_f = self.position(f)?;
        let n = self.time.count;
        let start = (i_f * self.omega_p.len() + i_scan) * n;
        Some(&self.components[start..start + n])
    }
}

fn require_uniform_phases(phi0: &[f64]) -> Result<()> {
    let m = phi0.len() as f64;
    for (k, &p) in phi0.iter().enumerate() {
        let want = phi0[0] + TAU * k as f64 / m;
        if (p - want).abs() > 1e-9 {
            return Err(Error::Domain(format!("phi0 axis is not uniform over [0, 2pi) at index {k}")));
        }
    }
    Ok(())
}

/// (1/M) Σ_k v_k e^{+ifφ_k}.
pub fn phi0_harmonic<T: Copy + Into<Complex64>>(phis: &[f64], values: &[T], f: i32) -> Complex64 {
    let sum: Complex64 = phis
        .iter()
        .zip(values)
        .map(|(&p, &v)| v.into() * Complex64::from_polar(1.0, f as f64 * p))
        .sum();
    sum / phis.len() as f64
}

pub fn phi0_fourier(grid: &IntensityGrid, f_max: u32) -> Result<PhiComponents> {
    let m = grid.phi0.len();
    if m < 2 * f_max as usize + 2 {
        return Err(Error::Domain(format!("{m} phases cannot resolve |f| <= {f_max}")));
    }
    require_uniform_phases(&grid.phi0)?;
    let f_values: Vec<i32> = (-(f_max as i32)..=f_max as i32).collect();
    let n_t = grid.time.count;
    let n_scan = grid.omega_p.len();
    let per_scan: Vec<Vec<Complex64>> = (0..n_scan)
        .into_par_iter()
        .map(|i| {
            let mut out = vec![Complex64::new(0.0, 0.0); f_values.len() * n_t];
            for (k, &phi) in grid.phi0.iter().enumerate() {
                let tr = grid.trace(i, k);
                for (j, &f) in f_values.iter().enumerate() {
                    let w = Complex64::from_polar(1.0 / m as f64, f as f64 * phi);
                    for (o, &v) in out[j * n_t..(j + 1) * n_t].iter_mut().zip(tr) {
                        *o += w * v;
                    }
                }
            }
            out
        })
        .collect();
    let mut components = vec![Complex64::new(0.0, 0.0); f_values.len() * n_scan * n_t];
    for (i, block) in per_scan.iter().enumerate() {
        for j in 0..f_values.len() {
            let dst = (j * n_scan + i) * n_t;
            components[dst..dst + n_t].copy_from_slice(&block[j * n_t..(j + 1) * n_t]);
        }
    }
    Ok(PhiComponents { f_values, time: grid.time, omega_p: grid.omega_p.clone(), components, meta: grid.meta.clone() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BandWindow {
    Rect,
    /// Flat over the band, cosine roll-off over a further α·half-width outside it.
    Tukey { alpha: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    /// Offset S of the analyzer line (γ).
    pub offset: f64,
    /// Target support half-width l (γ).
    pub support_halfwidth: f64,
    pub band_halfwidth: f64,
    pub window: BandWindow,
    pub f_select: Vec<i32>,
}

impl FilterParams {
    pub fn new(offset: f64, support_halfwidth: f64) -> Self {
        Self {
            offset,
            support_halfwidth,
            band_halfwidth: support_halfwidth,
            window: BandWindow::Tukey { alpha: 0.5 },
            f_select: vec![-1, 1],
        }
    }

    pub fn for_config(cfg: &ExperimentConfig) -> Self {
        Self::new(cfg.offset + cfg.analyzer.resonance_offset, cfg.support_halfwidth)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.band_halfwidth > 0.0 && self.band_halfwidth.is_finite()) {
            return Err(Error::Domain(format!("band half-width must be > 0, got {}", self.band_halfwidth)));
        }
        if let BandWindow::Tukey { alpha } = self.window {
            if !(alpha > 0.0 && alpha <= 1.0) {
                return Err(Error::Domain(format!("tukey alpha must lie in (0, 1], got {alpha}")));
            }
        }
        if self.f_select.is_empty() || self.f_select.contains(&0) {
            return Err(Error::Domain("f selection must be non-empty and exclude f = 0".into()));
        }
        Ok(())
    }

    fn rolloff(&self) -> f64 {
        match self.window {
            BandWindow::Rect => 0.0,
            BandWindow::Tukey { alpha } => alpha * self.band_halfwidth,
        }
    }

    /// Mask value at distance `d` ≥ 0 from a band centre whose flat part has half-width `flat`.
    fn mask(&self, d: f64, flat: f64) -> f64 {
        let r = self.rolloff();
        if d <= flat {
            1.0
        } else if d < flat + r {
            0.5 * (1.0 + (PI * (d - flat) / r).cos())
        } else {
            0.0
        }
    }
}

/// Band-pass around `nu_c` with the configured half-width and window.
///
/// The signal is shifted to baseband and mirror-extended to 2n samples before the FFT, so
/// the periodic continuation has no jump; a tone at exactly `nu_c` passes unchanged.
pub fn t_filter(signal: &[Complex64], time: &TimeGrid, nu_c: f64, params: &FilterParams) -> Result<Vec<Complex64>> {
    params.validate()?;
    band_pass(signal, time, nu_c, params.band_halfwidth, params)
}

fn band_pass(signal: &[Complex64], time: &TimeGrid, nu_c: f64, flat: f64, params: &FilterParams) -> Result<Vec<Complex64>> {
    let n = signal.len();
    if n != time.count {
        return Err(Error::GridMismatch(format!("{n} samples for a time axis of {}", time.count)));
    }
    let nyquist = PI / time.spacing;
    if !(nu_c.abs() + flat + params.rolloff() < nyquist) {
        return Err(Error::Domain(format!(
            "band at {nu_c} with half-width {flat} exceeds the Nyquist frequency {nyquist}"
        )));
    }
    let len = 2 * n;
    let mut buf = Vec::with_capacity(len);
    buf.extend((0..n).map(|j| signal[j] * Complex64::from_polar(1.0, nu_c * time.time(j))));
    for j in (0..n).rev() {
        buf.push(buf[j]);
    }
    plan_forward(len).process(&mut buf);
    let dnu = TAU / (len as f64 * time.spacing);
    for (k, v) in buf.iter_mut().enumerate() {
        // forward FFT bin k holds e^{−iνt} with ν = −k·Δν (aliased)
        let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
        *v *= params.mask((kk * dnu).abs(), flat) / len as f64;
    }
    plan_inverse(len).process(&mut buf);
    buf.truncate(n);
    for (j, v) in buf.iter_mut().enumerate() {
        *v *= Complex64::from_polar(1.0, -nu_c * time.time(j));
    }
    Ok(buf)
}

/// Pass the union of the bands at ±ν_c. Overlapping bands merge into one band centred at 0.
pub fn t_filter_pair(signal: &[Complex64], time: &TimeGrid, nu_c: f64, params: &FilterParams) -> Result<Vec<Complex64>> {
    params.validate()?;
    let w = params.band_halfwidth;
    let nu = nu_c.abs();
    if nu < w + params.rolloff() {
        return band_pass(signal, time, 0.0, nu + w, params);
    }
    let up = band_pass(signal, time, nu, w, params)?;
    let down = band_pass(signal, time, -nu, w, params)?;
    Ok(up.into_iter().zip(down).map(|(a, b)| a + b).collect())
}

/// Real filtered signal Ī_D over (scan, φ₀, t), laid out like [`IntensityGrid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilteredSignal {
    pub time: TimeGrid,
    pub phi0: Vec<f64>,
    pub omega_p: Vec<f64>,
    pub values: Vec<f64>,
    /// max |Im Ī_D| / max |Re Ī_D| before the imaginary part was dropped.
    pub imag_residue: f64,
    /// Set when S > 5l does not hold for the filter parameters.
    pub separation_warning: bool,
    pub params: FilterParams,
    pub meta: ExperimentConfig,
}

impl FilteredSignal {
    pub fn trace(&self, i_scan: usize, i_phi: usize) -> &[f64] {
        let n = self.time.count;
        let start = (i_scan * self.phi0.len() + i_phi) * n;
        &self.values[start..start + n]
    }

    pub fn times_ns(&self) -> Vec<f64> {
        let unit = self.meta.nuclide.time_unit_ns();
        self.time.times().into_iter().map(|t| t * unit).collect()
    }
}

/// φ₀-filter to the selected f, t-filter each component around ±(S − ω_p), resynthesise
/// Ī_D = Σ_f I^f_filt e^{−ifφ₀}.
pub fn combined_filter(grid: &IntensityGrid, params: &FilterParams) -> Result<FilteredSignal> {
    params.validate()?;
    let f_max = params.f_select.iter().map(|f| f.unsigned_abs()).max().unwrap_or(1);
    let comps = phi0_fourier(grid, f_max)?;
    let n_t = grid.time.count;
    let phis = &grid.phi0;
    let slices: Vec<Result<(Vec<f64>, f64, f64)>> = grid
        .omega_p
        .par_iter()
        .enumerate()
        .map(|(i, &w_p)| {
            let nu_c = params.offset - w_p;
            let mut filtered = Vec::with_capacity(params.f_select.len());
            for &f in &params.f_select {
                let src = comps.slice(f, i).expect("component computed");
                filtered.push((f, t_filter_pair(src, &grid.time, nu_c, params)?));
            }
            let mut out = Vec::with_capacity(phis.len() * n_t);
            let (mut im_max, mut re_max) = (0.0f64, 0.0f64);
            for &phi in phis {
                for j in 0..n_t {
                    let v: Complex64 =
                        filtered.iter().map(|(f, s)| s[j] * Complex64::from_polar(1.0, -(*f as f64) * phi)).sum();
                    im_max = im_max.max(v.im.abs());
                    re_max = re_max.max(v.re.abs());
                    out.push(v.re);
                }
            }
            Ok((out, im_max, re_max))
        })
        .collect();
    let mut values = Vec::with_capacity(grid.values.len());
    let (mut im_max, mut re_max) = (0.0f64, 0.0f64);
    for s in slices {
        let (v, im, re) = s?;
        values.extend(v);
        im_max = im_max.max(im);
        re_max = re_max.max(re);
    }
    let imag_residue = if re_max > 0.0 { im_max / re_max } else { im_max };
    Ok(FilteredSignal {
        time: grid.time,
        phi0: grid.phi0.clone(),
        omega_p: grid.omega_p.clone(),
        values,
        imag_residue,
        separation_warning: !check_separation(params.offset, params.support_halfwidth).ok,
        params: params.clone(),
        meta: grid.meta.clone(),
    })
}

/// Fraction of the signal energy within |ν − ν_c| ≤ halfwidth, from the periodogram of the
/// record zero-padded to `pad` times its length.
pub fn band_energy_fraction(signal: &[Complex64], time: &TimeGrid, nu_c: f64, halfwidth: f64, pad: usize) -> f64 {
    let len = (signal.len() * pad.max(1)).next_power_of_two();
    let mut buf = signal.to_vec();
    buf.resize(len, Complex64::new(0.0, 0.0));
    plan_forward(len).process(&mut buf);
    let dnu = TAU / (len as f64 * time.spacing);
    let (mut inside, mut total) = (0.0, 0.0);
    for (k, v) in buf.iter().enumerate() {
        let kk = if k <= len / 2 { k as f64 } else { k as f64 - len as f64 };
        let e = v.norm_sqr();
        total += e;
        if (-kk * dnu - nu_c).abs() <= halfwidth {
            inside += e;
        }
    }
    if total > 0.0 {
        inside / total
    } else {
        0.0
    }
}


#[cfg(test)]
mod grid_tests {
    use super::*;
    use crate::response::AnalyzerSpec;
    use crate::simulate::{detector_intensity, linspace, ExperimentConfig};
    use crate::target::TargetPreset;

    fn small(b: f64) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(b).unwrap()).unwrap();
        let l = cfg.support_halfwidth;
        cfg.omega_p_scan = linspace(cfg.offset - l, cfg.offset + l, 3);
        cfg
    }

    #[test]
    fn target_intensity_is_eliminated() {
        let cfg = small(0.0);
        let g = detector_intensity(&cfg).unwrap();
        let out = combined_filter(&g, &FilterParams::for_config(&cfg)).unwrap();
        let top = g.values.iter().copied().fold(0.0, f64::max);
        assert!(out.values.iter().all(|v| v.abs() <= 1e-12 * top));
    }

    #[test]
    fn phase_independent_content_is_removed() {
        let cfg = small(0.5);
        let mut g = detector_intensity(&cfg).unwrap();
        let n = g.time.count;
        for i in 0..g.omega_p.len() {
            let first = g.trace(i, 0).to_vec();
            for k in 0..g.phi0.len() {
                let s = g.index(i, k, 0);
                g.values[s..s + n].copy_from_slice(&first);
            }
        }
        let out = combined_filter(&g, &FilterParams::for_config(&cfg)).unwrap();
        let top = g.values.iter().copied().fold(0.0, f64::max);
        assert!(out.values.iter().all(|v| v.abs() <= 1e-12 * top));
    }

    #[test]
    fn phase_and_time_filters_commute() {
        let cfg = small(0.5);
        let g = detector_intensity(&cfg).unwrap();
        let params = FilterParams::for_config(&cfg);
        let comps = phi0_fourier(&g, 1).unwrap();
        let i = 2;
        let nu_c = params.offset - g.omega_p[i];
        let phi_first = t_filter_pair(comps.slice(1, i).unwrap(), &g.time, nu_c, &params).unwrap();
        let per_trace: Vec<Vec<Complex64>> = (0..g.phi0.len())
            .map(|k| {
                let tr: Vec<Complex64> = g.trace(i, k).iter().map(|&v| Complex64::new(v, 0.0)).collect();
                t_filter_pair(&tr, &g.time, nu_c, &params).unwrap()
            })
            .collect();
        let n = g.time.count;
        let time_first: Vec<Complex64> =
            (0..n).map(|j| phi0_harmonic(&g.phi0, &per_trace.iter().map(|t| t[j]).collect::<Vec<_>>(), 1)).collect();
        assert!(crate::cmath::relative_l2(&time_first, &phi_first) < 1e-12);
    }
}
