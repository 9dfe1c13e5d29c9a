//! Stationary single-line analyzer: frequency response, scattering kernel in time, and
//! the simple-pole primitives shared with the target and simulator code.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bessel::{bessel_j_unchecked, MAX_ARGUMENT};
use crate::cmath::{expm1, expm1_minus_z, expm1_over_z, I};
use crate::error::{Error, Result};
use crate::grid::{ComplexSpectrum, FrequencyGrid, TimeGrid, TimeSignal};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerSpec {
    /// Thickness parameter b in units of γ.
    pub b: f64,
    #[serde(default = "one")]
    pub linewidth: f64,
    #[serde(default)]
    pub resonance_offset: f64,
}

fn one() -> f64 {
    1.0
}

impl AnalyzerSpec {
    pub fn new(b: f64, linewidth: f64, resonance_offset: f64) -> Result<Self> {
        let a = Self { b, linewidth, resonance_offset };
        a.validate()?;
        Ok(a)
    }

    pub fn with_thickness(b: f64) -> Result<Self> {
        Self::new(b, 1.0, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0 && self.b.is_finite()) {
            return Err(Error::Domain(format!("analyzer b must be >= 0, got {}", self.b)));
        }
        if !(self.linewidth > 0.0 && self.linewidth.is_finite()) {
            return Err(Error::Domain(format!("analyzer linewidth must be > 0, got {}", self.linewidth)));
        }
        if !self.resonance_offset.is_finite() {
            return Err(Error::Domain("analyzer resonance offset must be finite".into()));
        }
        Ok(())
    }

    /// Complex pole q = ω_a − iγ_a/2.
    pub fn pole(&self) -> Complex64 {
        Complex64::new(self.resonance_offset, -0.5 * self.linewidth)
    }

    /// The same analyzer with its resonance moved by `shift`.
    pub fn shifted(&self, shift: f64) -> Self {
        Self { resonance_offset: self.resonance_offset + shift, ..*self }
    }

    fn exponent(&self, omega: f64) -> Complex64 {
        -I * self.b / (omega - self.pole())
    }

    /// R̂(ω) = exp(−ib/(ω − ω_a + iγ_a/2)).
    pub fn response_at(&self, omega: f64) -> Complex64 {
        self.exponent(omega).exp()
    }

    /// R̂_S(ω) = 1 − R̂(ω).
    pub fn scattering_at(&self, omega: f64) -> Complex64 {
        -expm1(self.exponent(omega))
    }

    /// R̂_S minus its leading pole ib/(ω − q); decays as 1/ω².
    pub fn scattering_remainder_at(&self, omega: f64) -> Complex64 {
        -expm1_minus_z(self.exponent(omega))
    }

    /// Leading pole of R̂_S as a [`Pole`].
    pub fn scattering_pole(&self) -> Pole {
        Pole { residue: I * self.b, position: self.pole() }
    }

    /// R_S(t) for t > 0: √(b/t) J₁(2√(bt)) e^{−iω_a t − γ_a t/2}. Zero for t < 0, and half
    /// the right limit at t = 0.
    pub fn scattering_time_at(&self, t: f64) -> Complex64 {
        if t < 0.0 || self.b == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let envelope = (-I * self.pole() * t).exp();
        let k = scattering_kernel(self.b, t);
        if t == 0.0 {
            0.5 * k * envelope
        } else {
            k * envelope
        }
    }
}

/// √(b/t) J₁(2√(bt)), continued to b at t = 0.
pub fn scattering_kernel(b: f64, t: f64) -> f64 {
    let x = 2.0 * (b * t).sqrt();
    if x < 1e-6 {
        return b * (1.0 - 0.5 * b * t);
    }
    if x > MAX_ARGUMENT {
        // |J₁| ≤ 1; the envelope has long underflowed for any physical γ_a.
        return 0.0;
    }
    2.0 * b * bessel_j_unchecked(1, x) / x
}

/// Simple pole r/(ω − p) with Im p < 0; its causal transform is −i r e^{−ipt} θ(t).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pole {
    pub residue: Complex64,
    pub position: Complex64,
}

impl Pole {
    pub fn freq(&self, omega: f64) -> Complex64 {
        self.residue / (omega - self.position)
    }

    pub fn time(&self, t: f64) -> Complex64 {
        if t < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let v = -I * self.residue * (-I * self.position * t).exp();
        if t == 0.0 {
            0.5 * v
        } else {
            v
        }
    }

    pub fn shifted(&self, shift: f64) -> Self {
        Self { residue: self.residue, position: self.position + shift }
    }
}

/// C/((ω − p)(ω − q)) with Im p, Im q < 0. Its causal transform −C t e^{−ipt} φ(−i(q − p)t),
/// φ(z) = (e^z − 1)/z, stays finite as q → p.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolePair {
    pub coefficient: Complex64,
    pub first: Complex64,
    pub second: Complex64,
}

impl PolePair {
    pub fn freq(&self, omega: f64) -> Complex64 {
        self.coefficient / ((omega - self.first) * (omega - self.second))
    }

    pub fn time(&self, t: f64) -> Complex64 {
        if t <= 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let z = -I * (self.second - self.first) * t;
        -self.coefficient * t * (-I * self.first * t).exp() * expm1_over_z(z)
    }
}

pub fn analyzer_response_freq(g: &FrequencyGrid, a: &AnalyzerSpec) -> ComplexSpectrum {
    ComplexSpectrum::from_fn(*g, |w| a.response_at(w))
}

pub fn analyzer_scattering_freq(g: &FrequencyGrid, a: &AnalyzerSpec) -> ComplexSpectrum {
    ComplexSpectrum::from_fn(*g, |w| a.scattering_at(w))
}

/// R_S(t) on the grid, so that R(t) = δ(t) − R_S(t).
pub fn analyzer_scattering_time(g: &TimeGrid, a: &AnalyzerSpec) -> TimeSignal {
    TimeSignal {
        grid: *g,
        values: g.times().into_iter().map(|t| a.scattering_time_at(t)).collect(),
        delta: Complex64::new(0.0, 0.0),
    }
}

/// Full response R(t) = δ(t) − R_S(t) with the δ carried in the flag.
pub fn analyzer_response_time(g: &TimeGrid, a: &AnalyzerSpec) -> TimeSignal {
    let mut s = analyzer_scattering_time(g, a);
    for v in s.values.iter_mut() {
        *v = -*v;
    }
    s.delta = Complex64::new(1.0, 0.0);
    s
}
