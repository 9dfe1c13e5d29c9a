//! Physical constants and unit conversions.
//!
//! Frequencies are carried in units of the single-nucleus linewidth γ and
//! times in units of 1/γ. All stored signals live in the frame rotating at
//! the nuclear transition frequency, so the 14.4 keV carrier never appears.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Reduced Planck constant in eV·s (CODATA 2018).
pub const HBAR_EV_S: f64 = 6.582_119_569e-16;

/// Nuclear and material constants entering the thickness parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NuclideConstants {
    /// Nuclear number density ρ_N in nm⁻³.
    pub number_density: f64,
    /// Resonant wave number k₀ in nm⁻¹.
    pub wave_number: f64,
    /// Lamb-Mössbauer factor.
    pub lamb_moessbauer: f64,
    /// Internal conversion coefficient α.
    pub conversion_coeff: f64,
    /// Natural linewidth γ in neV.
    pub linewidth_nev: f64,
    /// Transition energy in keV.
    pub transition_energy_kev: f64,
}

impl Default for NuclideConstants {
    /// ⁵⁷Fe.
    fn default() -> Self {
        Self {
            number_density: 83.18,
            wave_number: 73.039,
            lamb_moessbauer: 0.8,
            conversion_coeff: 8.56,
            linewidth_nev: 4.7,
            transition_energy_kev: 14.4,
        }
    }
}

impl NuclideConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("number_density", self.number_density),
            ("wave_number", self.wave_number),
            ("lamb_moessbauer", self.lamb_moessbauer),
            ("conversion_coeff", self.conversion_coeff),
            ("linewidth_nev", self.linewidth_nev),
            ("transition_energy_kev", self.transition_energy_kev),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("nuclide constant {name} must be positive, got {v}"));
            }
        }
        if self.lamb_moessbauer > 1.0 {
            return domain(format!(
                "lamb_moessbauer must lie in (0, 1], got {}",
                self.lamb_moessbauer
            ));
        }
        Ok(())
    }

    /// Lifetime ħ/γ in nanoseconds.
    pub fn time_unit_ns(&self) -> f64 {
        HBAR_EV_S / (self.linewidth_nev * 1e-9) * 1e9
    }

    pub fn ns_to_time(&self, ns: f64) -> f64 {
        ns / self.time_unit_ns()
    }

    pub fn time_to_ns(&self, t: f64) -> f64 {
        t * self.time_unit_ns()
    }

    pub fn nev_to_freq(&self, nev: f64) -> f64 {
        nev / self.linewidth_nev
    }

    pub fn freq_to_nev(&self, w: f64) -> f64 {
        w * self.linewidth_nev
    }
}

/// Thickness parameter b (in units of γ) of a single-line foil of thickness `d_um` micrometres.
///
/// b = π ρ_N f_LM γ d / (k₀² (α + 1)); the γ factor is the unit.
pub fn thickness_param(d_um: f64, c: &NuclideConstants) -> Result<f64> {
    if !(d_um >= 0.0 && d_um.is_finite()) {
        return domain(format!("thickness must be non-negative, got {d_um} µm"));
    }
    let d_nm = d_um * 1e3;
    Ok(std::f64::consts::PI * c.number_density * c.lamb_moessbauer * d_nm
        / (c.wave_number * c.wave_number * (c.conversion_coeff + 1.0)))
}
