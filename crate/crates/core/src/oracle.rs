//! Closed-form DFT images of causal responses, used to validate the FFT paths.
//!
//! Sampling a causal response on a periodic time grid turns its spectrum into the
//! sum of all images F(ω + mΩ), Ω the grid span. Poles sum in closed form; the
//! smooth remainder is summed directly.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cmath::{relative_l2, I};
use crate::error::Result;
use crate::grid::{time_to_freq, FrequencyGrid};
use crate::motion::{oscillating_response_time, sideband_coefficients, MotionPattern};
use crate::response::{analyzer_response_time, AnalyzerSpec, Pole};
use crate::target::{target_response_time, TargetModel};

/// Σ_m 1/(z + mΩ).
pub fn image_sum1(z: Complex64, span: f64) -> Complex64 {
    let u = PI * z / span;
    PI / span * u.cos() / u.sin()
}

/// Σ_m 1/(z + mΩ)².
pub fn image_sum2(z: Complex64, span: f64) -> Complex64 {
    let s = (PI * z / span).sin();
    (PI / span) * (PI / span) / (s * s)
}

/// Σ_m F(ω + mΩ) for F = Σ poles + Σ double poles + remainder, the remainder summed
/// directly over |m| ≤ m_max.
pub fn periodized(
    omega: f64,
    span: f64,
    poles: &[Pole],
    double_poles: &[Pole],
    remainder: &dyn Fn(f64) -> Complex64,
    m_max: i64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for p in poles {
        acc += p.residue * image_sum1(omega - p.position, span);
    }
    for p in double_poles {
        acc += p.residue * image_sum2(omega - p.position, span);
    }
    for m in -m_max..=m_max {
        acc += remainder(omega + m as f64 * span);
    }
    acc
}

/// Image-summed Σ c_n R̂(ω + s_n) for analyzer copies with weights c_n and shifts s_n.
fn periodized_copies(copies: &[(Complex64, AnalyzerSpec)], g: &FrequencyGrid, m_max: i64) -> Vec<Complex64> {
    let mut poles = Vec::new();
    let mut dpoles = Vec::new();
    for (c, s) in copies {
        poles.push(Pole { residue: -c * I * s.b, position: s.pole() });
        dpoles.push(Pole { residue: -c * 0.5 * s.b * s.b, position: s.pole() });
    }
    let rem = |w: f64| {
        copies
            .iter()
            .map(|(c, s)| {
                let x = s.b / (w - s.pole());
                -c * (s.scattering_remainder_at(w) - 0.5 * x * x)
            })
            .sum::<Complex64>()
    };
    let total: Complex64 = copies.iter().map(|(c, _)| c).sum();
    g.omegas().into_iter().map(|w| total + periodized(w, g.span(), &poles, &dpoles, &rem, m_max)).collect()
}

/// Relative L2 between the DFT of the sampled analyzer response and its image-summed spectrum.
pub fn analyzer_fft_error(a: &AnalyzerSpec, g: &FrequencyGrid) -> Result<f64> {
    let got = time_to_freq(&analyzer_response_time(&g.dual(), a), g)?;
    Ok(relative_l2(&got.values, &periodized_copies(&[(Complex64::new(1.0, 0.0), *a)], g, 64)))
}

/// Same check for a harmonically moving analyzer.
pub fn oscillating_fft_error(a: &AnalyzerSpec, p: f64, phi0: f64, omega_p: f64, g: &FrequencyGrid) -> Result<f64> {
    let m = MotionPattern::Harmonic { p, omega_p, phi0 };
    let got = time_to_freq(&oscillating_response_time(a, &m, &g.dual())?, g)?;
    let e = sideband_coefficients(p, phi0, 1e-12)?;
    let copies: Vec<(Complex64, AnalyzerSpec)> = e.orders().map(|n| (e.coefficient(n), a.shifted(-(n as f64) * omega_p))).collect();
    Ok(relative_l2(&got.values, &periodized_copies(&copies, g, 24)))
}

/// Same check for a target model.
pub fn target_fft_error(m: &TargetModel, g: &FrequencyGrid) -> Result<f64> {
    let got = time_to_freq(&target_response_time(m, &g.dual())?, g)?;
    let c0 = m.c0();
    let pairs = m.pole_pairs();
    let rem = |w: f64| m.remainder_at(w) + pairs.iter().map(|p| p.freq(w)).sum::<Complex64>();
    let m_max = if m.has_remainder() { 400 } else { 0 };
    let want: Vec<Complex64> = g.omegas().into_iter().map(|w| c0 + periodized(w, g.span(), &m.poles(), &[], &rem, m_max)).collect();
    Ok(relative_l2(&got.values, &want))
}
