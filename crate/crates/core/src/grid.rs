//! Uniform frequency and time grids and the Fourier convention shared by all modules.
//!
//! R(t) = (1/2π) ∫ R̂(ω) e^{−iωt} dω and R̂(ω) = ∫ R(t) e^{+iωt} dt. On a grid
//! with ω_k = c + (k − N/2)Δω the dual time grid is t_j = (j − N/2)Δt with
//! Δt·Δω = 2π/N, and the two sums below are exact inverses of each other.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

pub(crate) fn plan_forward(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n))
}

pub(crate) fn plan_inverse(n: usize) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub center: f64,
    pub spacing: f64,
    pub count: usize,
}

impl FrequencyGrid {
    pub fn new(center: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) {
            return Err(Error::Domain(format!("frequency spacing must be positive, got {spacing}")));
        }
        if count < 2 || !count.is_power_of_two() {
            return Err(Error::Domain(format!("grid count must be a power of two >= 2, got {count}")));
        }
        if !center.is_finite() {
            return Err(Error::Domain("grid center must be finite".into()));
        }
        Ok(Self { center, spacing, count })
    }

    /// Grid that additionally must cover `support` on each side of its center.
    pub fn with_support(center: f64, spacing: f64, count: usize, support: f64) -> Result<Self> {
        let g = Self::new(center, spacing, count)?;
        if g.span() <= 2.0 * support {
            return Err(Error::InsufficientSpan(format!(
                "span {} does not exceed requested support ±{support}",
                g.span()
            )));
        }
        Ok(g)
    }

    /// 2048 γ wide, 2¹⁴ points.
    pub fn default_grid() -> Self {
        Self { center: 0.0, spacing: 0.125, count: 1 << 14 }
    }

    pub fn span(&self) -> f64 {
        self.spacing * self.count as f64
    }

    pub fn omega(&self, k: usize) -> f64 {
        self.center + (k as f64 - (self.count / 2) as f64) * self.spacing
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.omega(k)).collect()
    }

    pub fn min(&self) -> f64 {
        self.omega(0)
    }

    pub fn max(&self) -> f64 {
        self.omega(self.count - 1)
    }

    /// True if [lo, hi] lies inside the sampled band.
    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        lo >= self.min() && hi <= self.max()
    }

    pub fn require_cover(&self, lo: f64, hi: f64, what: &str) -> Result<()> {
        if self.covers(lo, hi) {
            Ok(())
        } else {
            Err(Error::InsufficientSpan(format!(
                "{what} needs [{lo:.3}, {hi:.3}] but grid spans [{:.3}, {:.3}]",
                self.min(),
                self.max()
            )))
        }
    }

    pub fn dual(&self) -> TimeGrid {
        let dt = 2.0 * PI / (self.count as f64 * self.spacing);
        TimeGrid { start: -((self.count / 2) as f64) * dt, spacing: dt, count: self.count }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub start: f64,
    pub spacing: f64,
    pub count: usize,
}

impl TimeGrid {
    pub fn new(start: f64, spacing: f64, count: usize) -> Result<Self> {
        if !(spacing > 0.0 && spacing.is_finite()) || !start.is_finite() {
            return Err(Error::Domain(format!("invalid time grid start={start} spacing={spacing}")));
        }
        if count == 0 {
            return Err(Error::Domain("time grid must be non-empty".into()));
        }
        Ok(Self { start, spacing, count })
    }

    pub fn time(&self, j: usize) -> f64 {
        self.start + j as f64 * self.spacing
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.count).map(|j| self.time(j)).collect()
    }

    pub fn end(&self) -> f64 {
        self.time(self.count - 1)
    }

    fn matches(&self, other: &TimeGrid) -> bool {
        self.count == other.count
            && (self.spacing - other.spacing).abs() <= 1e-12 * self.spacing
            && (self.start - other.start).abs() <= 1e-9 * self.spacing
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexSpectrum {
    pub grid: FrequencyGrid,
    pub values: Vec<Complex64>,
}

impl ComplexSpectrum {
    pub fn new(grid: FrequencyGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("spectrum contains non-finite values".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: FrequencyGrid, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.count).map(|k| f(grid.omega(k))).collect();
        Self { grid, values }
    }
}

/// A causal time response. `delta` is the weight of a δ(t) term carried symbolically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSignal {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub delta: Complex64,
}

impl TimeSignal {
    pub fn new(grid: TimeGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.count {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {}",
                values.len(),
                grid.count
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Domain("time signal contains non-finite values".into()));
        }
        Ok(Self { grid, values, delta: Complex64::new(0.0, 0.0) })
    }
}

fn sign_n(n: usize) -> f64 {
    if n == 2 {
        -1.0
    } else {
        1.0
    }
}

fn alternate(j: usize) -> f64 {
    if j % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// (Δω/2π) Σ_k F(ω_k) e^{−iω_k t_j} on the dual grid, in place.
pub(crate) fn freq_to_time_in_place(grid: &FrequencyGrid, buf: &mut [Complex64]) {
    let n = grid.count;
    debug_assert_eq!(buf.len(), n);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= alternate(k);
    }
    plan_forward(n).process(buf);
    let tg = grid.dual();
    let scale = grid.spacing / (2.0 * PI) * sign_n(n);
    for (j, v) in buf.iter_mut().enumerate() {
        let t = tg.time(j);
        *v *= Complex64::from_polar(scale * alternate(j), -grid.center * t);
    }
}

/// Δt Σ_j f(t_j) e^{+iω_k t_j}, in place.
pub(crate) fn time_to_freq_in_place(grid: &FrequencyGrid, buf: &mut [Complex64]) {
    let n = grid.count;
    let tg = grid.dual();
    for (j, v) in buf.iter_mut().enumerate() {
        let t = tg.time(j);
        *v *= Complex64::from_polar(alternate(j), grid.center * t);
    }
    plan_inverse(n).process(buf);
    let scale = tg.spacing * sign_n(n);
    for (k, v) in buf.iter_mut().enumerate() {
        *v *= scale * alternate(k);
    }
}

pub fn freq_to_time(s: &ComplexSpectrum) -> TimeSignal {
    let mut buf = s.values.clone();
    freq_to_time_in_place(&s.grid, &mut buf);
    TimeSignal { grid: s.grid.dual(), values: buf, delta: Complex64::new(0.0, 0.0) }
}

/// Inverse of [`freq_to_time`]. The time grid must be the dual of `grid`.
/// The symbolic δ weight contributes a constant to every frequency.
pub fn time_to_freq(s: &TimeSignal, grid: &FrequencyGrid) -> Result<ComplexSpectrum> {
    if !s.grid.matches(&grid.dual()) {
        return Err(Error::GridMismatch(format!(
            "time grid {:?} is not the dual of frequency grid {:?}",
            s.grid, grid
        )));
    }
    let mut buf = s.values.clone();
    time_to_freq_in_place(grid, &mut buf);
    for v in buf.iter_mut() {
        *v += s.delta;
    }
    Ok(ComplexSpectrum { grid: *grid, values: buf })
}
