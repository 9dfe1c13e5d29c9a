//! Absorber trajectories and the sideband structure they imprint on the analyzer response.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_all, bessel_j_unchecked};
use crate::cmath::I;
use crate::error::{Error, Result};
use crate::grid::{ComplexSpectrum, FrequencyGrid, TimeGrid, TimeSignal};
use crate::response::AnalyzerSpec;

/// Default truncation tolerance on the discarded Bessel weight.
pub const DEFAULT_SIDEBAND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MotionPattern {
    Harmonic { p: f64, omega_p: f64, phi0: f64 },
    Pssl { phi0: f64, omega_p: f64 },
    ConstantVelocity { detuning: f64 },
    Stationary,
}

impl MotionPattern {
    pub fn validate(&self) -> Result<()> {
        let phase_ok = |phi: f64| (0.0..TAU).contains(&phi);
        match *self {
            MotionPattern::Harmonic { p, omega_p, phi0 } => {
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::Domain(format!("modulation depth must be >= 0, got {p}")));
                }
                if !(omega_p > 0.0 && omega_p.is_finite()) {
                    return Err(Error::Domain(format!("omega_p must be > 0, got {omega_p}")));
                }
                if !phase_ok(phi0) {
                    return Err(Error::Domain(format!("phi0 must lie in [0, 2π), got {phi0}")));
                }
            }
            MotionPattern::Pssl { phi0, omega_p } => {
                if !(omega_p > 0.0 && omega_p.is_finite()) {
                    return Err(Error::Domain(format!("omega_p must be > 0, got {omega_p}")));
                }
                if !phase_ok(phi0) {
                    return Err(Error::Domain(format!("phi0 must lie in [0, 2π), got {phi0}")));
                }
            }
            MotionPattern::ConstantVelocity { detuning } => {
                if !detuning.is_finite() {
                    return Err(Error::Domain("detuning must be finite".into()));
                }
            }
            MotionPattern::Stationary => {}
        }
        Ok(())
    }

    /// Sideband weights and shifts with R̂_osc(ω) = 1 − Σ β_j R̂_S(ω + shift_j).
    pub fn sidebands(&self, tol: f64) -> Result<Vec<Sideband>> {
        self.validate()?;
        Ok(match *self {
            MotionPattern::Harmonic { p, omega_p, phi0 } => {
                let e = sideband_coefficients(p, phi0, tol)?;
                e.orders()
                    .map(|n| Sideband { weight: e.coefficient(n), shift: n as f64 * omega_p, order: n })
                    .collect()
            }
            MotionPattern::Pssl { phi0, omega_p } => {
                vec![Sideband { weight: Complex64::from_polar(1.0, phi0), shift: omega_p, order: 1 }]
            }
            MotionPattern::ConstantVelocity { detuning } => {
                vec![Sideband { weight: Complex64::new(1.0, 0.0), shift: detuning, order: 0 }]
            }
            MotionPattern::Stationary => {
                vec![Sideband { weight: Complex64::new(1.0, 0.0), shift: 0.0, order: 0 }]
            }
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sideband {
    pub weight: Complex64,
    pub shift: f64,
    pub order: i32,
}

/// e^{ik₀[z(t) − z(0)]}.
pub fn motion_phase_factor(m: &MotionPattern, t: f64) -> Complex64 {
    match *m {
        MotionPattern::Harmonic { p, omega_p, phi0 } => {
            (I * p * ((omega_p * t + phi0).sin() - phi0.sin())).exp()
        }
        MotionPattern::Pssl { phi0, omega_p } => {
            if t > 0.0 {
                (I * (phi0 + omega_p * t)).exp()
            } else {
                Complex64::new(1.0, 0.0)
            }
        }
        MotionPattern::ConstantVelocity { detuning } => (I * detuning * t).exp(),
        MotionPattern::Stationary => Complex64::new(1.0, 0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidebandExpansion {
    pub max_order: u32,
    /// α_n for n = −N_max..=N_max.
    pub coefficients: Vec<Complex64>,
    pub p: f64,
    pub phi0: f64,
}

impl SidebandExpansion {
    pub fn orders(&self) -> std::ops::RangeInclusive<i32> {
        let n = self.max_order as i32;
        -n..=n
    }

    pub fn coefficient(&self, n: i32) -> Complex64 {
        let idx = n + self.max_order as i32;
        if idx < 0 || idx as usize >= self.coefficients.len() {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[idx as usize]
        }
    }

    pub fn retained_weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Smallest N with 2 Σ_{n>N} J_n(p)² < tol.
pub fn truncation_order(p: f64, tol: f64) -> Result<u32> {
    if !(tol > 0.0 && tol <= 1e-4) {
        return Err(Error::Domain(format!("sideband tolerance must lie in (0, 1e-4], got {tol}")));
    }
    if p == 0.0 {
        return Ok(0);
    }
    let top = (p.abs() + 40.0 + 8.0 * p.abs().sqrt()).ceil() as u32;
    let j = bessel_j_all(top, p)?;
    let mut tail = 0.0;
    let mut n = top as usize;
    // tail holds 2 Σ_{k>n} J_k²
    while n > 0 {
        let next = tail + 2.0 * j[n] * j[n];
        if next >= tol {
            return Ok(n as u32);
        }
        tail = next;
        n -= 1;
    }
    Ok(0)
}

pub fn sideband_coefficients(p: f64, phi0: f64, tol: f64) -> Result<SidebandExpansion> {
    if !(p >= 0.0 && p.is_finite()) {
        return Err(Error::Domain(format!("modulation depth must be >= 0, got {p}")));
    }
    let nmax = truncation_order(p, tol)?;
    let base = Complex64::from_polar(1.0, -p * phi0.sin());
    let coefficients = (-(nmax as i32)..=nmax as i32)
        .map(|n| {
            let jn = if n >= 0 {
                bessel_j_unchecked(n as u32, p)
            } else if n % 2 == 0 {
                bessel_j_unchecked((-n) as u32, p)
            } else {
                -bessel_j_unchecked((-n) as u32, p)
            };
            jn * base * Complex64::from_polar(1.0, n as f64 * phi0)
        })
        .collect();
    Ok(SidebandExpansion { max_order: nmax, coefficients, p, phi0 })
}

/// R̂_osc(ω) = 1 − Σ α_n R̂_S(ω + nω_p).
pub fn oscillating_response_freq(
    a: &AnalyzerSpec,
    e: &SidebandExpansion,
    omega_p: f64,
    g: &FrequencyGrid,
) -> Result<ComplexSpectrum> {
    let reach = e.max_order as f64 * omega_p + 50.0 * a.linewidth;
    g.require_cover(a.resonance_offset - reach, a.resonance_offset + reach, "oscillating response")?;
    let terms: Vec<(Complex64, AnalyzerSpec)> =
        e.orders().map(|n| (e.coefficient(n), a.shifted(-(n as f64) * omega_p))).collect();
    Ok(ComplexSpectrum::from_fn(*g, |w| {
        1.0 - terms.iter().map(|(c, s)| c * s.scattering_at(w)).sum::<Complex64>()
    }))
}

/// δ(t) − e^{ik₀[z(t)−z(0)]} R_S(t), with the δ in the flag. Valid for every motion variant.
pub fn oscillating_response_time(a: &AnalyzerSpec, m: &MotionPattern, g: &TimeGrid) -> Result<TimeSignal> {
    m.validate()?;
    let values = g
        .times()
        .into_iter()
        .map(|t| -motion_phase_factor(m, t) * a.scattering_time_at(t))
        .collect();
    Ok(TimeSignal { grid: *g, values, delta: Complex64::new(1.0, 0.0) })
}

/// R̂_PSSL(ω) = 1 − e^{iφ₀} R̂_S(ω + ω_p).
pub fn pssl_response_freq(a: &AnalyzerSpec, phi0: f64, omega_p: f64, g: &FrequencyGrid) -> Result<ComplexSpectrum> {
    let c = a.resonance_offset - omega_p;
    let reach = 50.0 * a.linewidth;
    g.require_cover(c - reach, c + reach, "PSSL response")?;
    let s = a.shifted(-omega_p);
    let w = Complex64::from_polar(1.0, phi0);
    Ok(ComplexSpectrum::from_fn(*g, |x| 1.0 - w * s.scattering_at(x)))
}

/// 1 − J₁(p) e^{iφ₀ − ip sin φ₀} R̂_S(ω + ω_p).
pub fn single_sideband_response(a: &AnalyzerSpec, p: f64, phi0: f64, omega_p: f64, g: &FrequencyGrid) -> ComplexSpectrum {
    let w = bessel_j_unchecked(1, p) * Complex64::from_polar(1.0, phi0 - p * phi0.sin());
    let s = a.shifted(-omega_p);
    ComplexSpectrum::from_fn(*g, |x| 1.0 - w * s.scattering_at(x))
}
