//! Spectral error metric, integration-range sweeps and analyzer-thickness search.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{combined_filter, FilterParams};
use crate::recovery::{cosine_fit, doppler_from_grid, doppler_intensity, recover_amplitude, FitResult, Method, RecoveredSpectrum};
use crate::simulate::{detector_intensity, linspace, ExperimentConfig, IntensityGrid};
use crate::target::TargetModel;
use crate::units::thickness_param;

/// |R̂_T|² at the recovered detunings, normalised to max 1 over that range.
pub fn reference_power(rec: &RecoveredSpectrum, reference: &TargetModel) -> Result<Vec<f64>> {
    if rec.detuning.is_empty() {
        return Err(Error::Domain("recovered spectrum has no detuning samples".into()));
    }
    let raw: Vec<f64> = rec.detuning.iter().map(|&d| reference.response_at(d).norm_sqr()).collect();
    let top = raw.iter().copied().fold(0.0, f64::max);
    if !(top > 0.0) {
        return Err(Error::Domain("reference spectrum vanishes over the recovered range".into()));
    }
    Ok(raw.into_iter().map(|v| v / top).collect())
}

/// Σ (A_rec − |R̂_T|²_norm)² over the recovered detunings.
pub fn spectral_error(rec: &RecoveredSpectrum, reference: &TargetModel) -> Result<f64> {
    let r = reference_power(rec, reference)?;
    Ok(rec.amplitude_sq.iter().zip(&r).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// [`spectral_error`] divided by Σ |R̂_T|⁴_norm, the error of an all-zero curve.
pub fn normalized_spectral_error(rec: &RecoveredSpectrum, reference: &TargetModel) -> Result<f64> {
    let r = reference_power(rec, reference)?;
    let scale: f64 = r.iter().map(|v| v * v).sum();
    Ok(spectral_error(rec, reference)? / scale)
}

/// Local maxima whose topographic prominence is at least `min_prominence`.
pub fn prominent_maxima(values: &[f64], min_prominence: f64) -> Vec<usize> {
    let n = values.len();
    let mut out = Vec::new();
    for k in 0..n {
        let v = values[k];
        let left_ok = k == 0 || values[k - 1] < v;
        let right_ok = k + 1 == n || values[k + 1] <= v;
        if !(left_ok && right_ok) || (k == 0 && n > 1 && values[1] == v) {
            continue;
        }
        // lowest point on each side before reaching higher ground
        let mut lo_l = v;
        let mut higher_l = false;
        for &w in values[..k].iter().rev() {
            if w > v {
                higher_l = true;
                break;
            }
            lo_l = lo_l.min(w);
        }
        let mut lo_r = v;
        let mut higher_r = false;
        for &w in &values[k + 1..] {
            if w > v {
                higher_r = true;
                break;
            }
            lo_r = lo_r.min(w);
        }
        let base = match (higher_l, higher_r) {
            (true, true) => lo_l.max(lo_r),
            (true, false) => lo_l,
            (false, true) => lo_r,
            (false, false) => lo_l.min(lo_r),
        };
        if (k > 0 && k + 1 < n || n == 1) && v - base >= min_prominence {
            out.push(k);
        }
    }
    out
}

/// Error matrix over (t₁, t₂); `None` marks cells with t₂ ≤ t₁ + 2Δt or a failed recovery.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub t1_ns: Vec<f64>,
    pub t2_ns: Vec<f64>,
    /// error[i₁][i₂]
    pub error: Vec<Vec<Option<f64>>>,
    pub method: Method,
    pub config_hash: String,
}

impl SweepResult {
    pub fn get(&self, t1: f64, t2: f64) -> Option<f64> {
        let i = self.t1_ns.iter().position(|&x| (x - t1).abs() < 1e-9)?;
        let j = self.t2_ns.iter().position(|&x| (x - t2).abs() < 1e-9)?;
        self.error[i][j]
    }

    /// Minimum over the defined cells satisfying `keep(t₁, t₂)`.
    pub fn min_where(&self, keep: impl Fn(f64, f64) -> bool) -> Option<(f64, f64, f64)> {
        let mut best: Option<(f64, f64, f64)> = None;
        for (i, &t1) in self.t1_ns.iter().enumerate() {
            for (j, &t2) in self.t2_ns.iter().enumerate() {
                if let Some(e) = self.error[i][j] {
                    if keep(t1, t2) && best.is_none_or(|b| e < b.2) {
                        best = Some((t1, t2, e));
                    }
                }
            }
        }
        best
    }

    pub fn min(&self) -> Option<(f64, f64, f64)> {
        self.min_where(|_, _| true)
    }
}

/// Default sweep axes: t₁ ∈ {15, 20, …, 60} ns and t₂ ∈ {70, 80, …, 190} ns.
pub fn default_sweep_axes() -> (Vec<f64>, Vec<f64>) {
    (linspace(15.0, 60.0, 10), linspace(70.0, 190.0, 13))
}

/// Simulated data reused by every cell of a sweep.
pub enum SweepData {
    Phantasy(FitResult),
    Doppler(IntensityGrid),
}

impl SweepData {
    /// Simulate and reduce once: filter and fit for PHANTASY, integrate-ready grid for Doppler.
    pub fn simulate(cfg: &ExperimentConfig, method: Method, params: &FilterParams) -> Result<Self> {
        match method {
            Method::Phantasy => {
                let grid = detector_intensity(cfg)?;
                Ok(SweepData::Phantasy(cosine_fit(&combined_filter(&grid, params)?)?))
            }
            Method::Doppler => {
                let detunings: Vec<f64> = cfg.omega_p_scan.iter().map(|&w| cfg.detuning(w)).collect();
                Ok(SweepData::Doppler(doppler_intensity(cfg, &detunings)?))
            }
        }
    }

    pub fn method(&self) -> Method {
        match self {
            SweepData::Phantasy(_) => Method::Phantasy,
            SweepData::Doppler(_) => Method::Doppler,
        }
    }

    pub fn recover(&self, t1_ns: f64, t2_ns: f64) -> Result<RecoveredSpectrum> {
        match self {
            SweepData::Phantasy(fit) => recover_amplitude(fit, t1_ns, t2_ns),
            SweepData::Doppler(grid) => doppler_from_grid(grid, t1_ns, t2_ns),
        }
    }

    fn step_ns(&self) -> f64 {
        let (g, n) = match self {
            SweepData::Phantasy(f) => (f.time, &f.meta.nuclide),
            SweepData::Doppler(i) => (i.time, &i.meta.nuclide),
        };
        g.spacing * n.time_unit_ns()
    }
}

/// Error of one recovery per (t₁, t₂) cell against the configured target.
pub fn sweep_with(data: &SweepData, reference: &TargetModel, t1s: &[f64], t2s: &[f64], config_hash: String) -> SweepResult {
    let dt = data.step_ns();
    let error = t1s
        .iter()
        .map(|&t1| {
            t2s.iter()
                .map(|&t2| {
                    if t2 <= t1 + 2.0 * dt {
                        return None;
                    }
                    data.recover(t1, t2).and_then(|r| spectral_error(&r, reference)).ok()
                })
                .collect()
        })
        .collect();
    SweepResult { t1_ns: t1s.to_vec(), t2_ns: t2s.to_vec(), error, method: data.method(), config_hash }
}

pub fn sweep_integration(cfg: &ExperimentConfig, method: Method, t1s: &[f64], t2s: &[f64]) -> Result<SweepResult> {
    sweep_integration_with(cfg, method, &FilterParams::for_config(cfg), t1s, t2s)
}

pub fn sweep_integration_with(cfg: &ExperimentConfig, method: Method, params: &FilterParams, t1s: &[f64], t2s: &[f64]) -> Result<SweepResult> {
    if t1s.is_empty() || t2s.is_empty() {
        return Err(Error::Domain("sweep axes must be non-empty".into()));
    }
    if t1s.windows(2).any(|w| w[1] <= w[0]) || t2s.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Domain("sweep axes must be strictly ascending".into()));
    }
    let data = SweepData::simulate(cfg, method, params)?;
    Ok(sweep_with(&data, &cfg.target, t1s, t2s, config_hash(cfg)?))
}

/// SHA-256 of the canonical JSON form of the configuration.
pub fn config_hash(cfg: &ExperimentConfig) -> Result<String> {
    use sha2::{Digest, Sha256};
    let json = serde_json::to_vec(cfg).map_err(|e| Error::Serialization(e.to_string()))?;
    Ok(Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessScan {
    pub thickness_um: Vec<f64>,
    pub error: Vec<f64>,
    pub best_thickness_um: f64,
    pub best_error: f64,
}

/// Grid search of the analyzer thickness for the Doppler baseline at fixed [t₁, t₂].
pub fn optimize_thickness(cfg: &ExperimentConfig, thickness_um: &[f64], t1_ns: f64, t2_ns: f64) -> Result<ThicknessScan> {
    if thickness_um.is_empty() {
        return Err(Error::Domain("thickness grid is empty".into()));
    }
    let detunings: Vec<f64> = cfg.omega_p_scan.iter().map(|&w| cfg.detuning(w)).collect();
    let mut error = Vec::with_capacity(thickness_um.len());
    for &d in thickness_um {
        let mut c = cfg.clone();
        c.analyzer.b = thickness_param(d, &cfg.nuclide)?;
        let grid = doppler_intensity(&c, &detunings)?;
        error.push(spectral_error(&doppler_from_grid(&grid, t1_ns, t2_ns)?, &cfg.target)?);
    }
    // first minimum wins ties
    let (mut k, mut best) = (0, error[0]);
    for (i, &e) in error.iter().enumerate() {
        if e < best {
            k = i;
            best = e;
        }
    }
    Ok(ThicknessScan { thickness_um: thickness_um.to_vec(), error, best_thickness_um: thickness_um[k], best_error: best })
}


#[cfg(test)]
mod doppler_tests {
    use super::*;
    use crate::recovery::doppler_recover;
    use crate::response::AnalyzerSpec;
    use crate::simulate::linspace;
    use crate::target::TargetPreset;

    fn single_line() -> ExperimentConfig {
        let c = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(0.5).unwrap()).unwrap();
        c.doppler_from(41)
    }

    #[test]
    fn late_window_beats_early_window() {
        let c = single_line();
        let l = c.support_halfwidth;
        let d = linspace(-1.2 * l, 1.2 * l, 41);
        let early = spectral_error(&doppler_recover(&c, &d, 15.0, 40.0).unwrap(), &c.target).unwrap();
        let late = spectral_error(&doppler_recover(&c, &d, 117.0, 192.0).unwrap(), &c.target).unwrap();
        assert!(late < early, "late {late} early {early}");
    }

    #[test]
    fn thickness_search_is_deterministic_and_avoids_zero() {
        let c = single_line();
        let d = [0.0, 0.5, 1.0, 2.0, 4.0];
        let a = optimize_thickness(&c, &d, 117.0, 192.0).unwrap();
        let b = optimize_thickness(&c, &d, 117.0, 192.0).unwrap();
        assert_eq!(a, b);
        assert!(a.best_thickness_um > 0.0);
        let worst = a.error.iter().copied().fold(0.0, f64::max);
        assert!(a.error[0] == worst, "{:?}", a.error);
    }
}
