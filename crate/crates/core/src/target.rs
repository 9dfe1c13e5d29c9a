//! Parametric stand-ins for the unknown target: Lorentzian sums and exponential multi-line
//! absorbers, with their time responses, group delay and spectral support.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cmath::{expm1_minus_z, I};
use crate::error::{Error, Result};
use crate::grid::{freq_to_time_in_place, ComplexSpectrum, FrequencyGrid, TimeGrid, TimeSignal};
use crate::response::{Pole, PolePair};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalLine {
    pub residue: Complex64,
    pub center: f64,
    pub width: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExponentialLine {
    pub b: f64,
    pub center: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TargetModel {
    Rational { c0: Complex64, lines: Vec<RationalLine> },
    ExponentialMultiLine { width: f64, lines: Vec<ExponentialLine> },
}

/// Passivity tolerance on max |R̂_T|.
pub const PASSIVITY_TOL: f64 = 1e-9;

impl TargetModel {
    pub fn rational(c0: Complex64, lines: Vec<RationalLine>) -> Result<Self> {
        let m = TargetModel::Rational { c0, lines };
        m.validate()?;
        Ok(m)
    }

    pub fn exponential(width: f64, lines: Vec<ExponentialLine>) -> Result<Self> {
        let m = TargetModel::ExponentialMultiLine { width, lines };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            TargetModel::Rational { c0, lines } => {
                if !(c0.norm() <= 1.0) {
                    return Err(Error::Domain(format!("|c0| must be <= 1, got {}", c0.norm())));
                }
                for l in lines {
                    if !(l.width > 0.0 && l.width.is_finite()) || !l.center.is_finite() {
                        return Err(Error::Domain(format!("invalid line {l:?}")));
                    }
                    if !(l.residue.re.is_finite() && l.residue.im.is_finite()) {
                        return Err(Error::Domain("line residue must be finite".into()));
                    }
                }
                let peak = self.peak_amplitude();
                if peak > 1.0 + PASSIVITY_TOL {
                    return Err(Error::Domain(format!("target is not passive: max |R_T| = {peak}")));
                }
            }
            TargetModel::ExponentialMultiLine { width, lines } => {
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::Domain(format!("line width must be > 0, got {width}")));
                }
                for l in lines {
                    if !(l.b >= 0.0 && l.b.is_finite()) || !l.center.is_finite() {
                        return Err(Error::Domain(format!("invalid line {l:?}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Asymptote c₀ of R̂_T at |ω| → ∞.
    pub fn c0(&self) -> Complex64 {
        match self {
            TargetModel::Rational { c0, .. } => *c0,
            TargetModel::ExponentialMultiLine { .. } => Complex64::new(1.0, 0.0),
        }
    }

    /// Simple poles of R̂_T − c₀ (exact for Rational, leading order otherwise).
    pub fn poles(&self) -> Vec<Pole> {
        match self {
            TargetModel::Rational { lines, .. } => lines
                .iter()
                .map(|l| Pole { residue: l.residue, position: Complex64::new(l.center, -0.5 * l.width) })
                .collect(),
            TargetModel::ExponentialMultiLine { width, lines } => lines
                .iter()
                .map(|l| Pole { residue: -I * l.b, position: Complex64::new(l.center, -0.5 * width) })
                .collect(),
        }
    }

    fn exponent(&self, omega: f64) -> Complex64 {
        self.poles().iter().map(|p| p.freq(omega)).sum()
    }

    pub fn response_at(&self, omega: f64) -> Complex64 {
        match self {
            TargetModel::Rational { c0, lines } => {
                *c0 + lines
                    .iter()
                    .map(|l| l.residue / (omega - Complex64::new(l.center, -0.5 * l.width)))
                    .sum::<Complex64>()
            }
            TargetModel::ExponentialMultiLine { .. } => self.exponent(omega).exp(),
        }
    }

    /// Second-order terms X²/2 of exp(X) written as pole pairs; empty for Rational.
    pub fn pole_pairs(&self) -> Vec<PolePair> {
        match self {
            TargetModel::Rational { .. } => Vec::new(),
            TargetModel::ExponentialMultiLine { .. } => {
                let poles = self.poles();
                let mut out = Vec::new();
                for (j, a) in poles.iter().enumerate() {
                    for b in &poles[j..] {
                        let weight = if a == b { 0.5 } else { 1.0 };
                        out.push(PolePair {
                            coefficient: weight * a.residue * b.residue,
                            first: a.position,
                            second: b.position,
                        });
                    }
                }
                out
            }
        }
    }

    /// R̂_T − c₀ − Σ poles − Σ pole pairs; zero for Rational, O(1/ω³) otherwise.
    pub fn remainder_at(&self, omega: f64) -> Complex64 {
        match self {
            TargetModel::Rational { .. } => Complex64::new(0.0, 0.0),
            TargetModel::ExponentialMultiLine { .. } => {
                let x = self.exponent(omega);
                expm1_minus_z(x) - 0.5 * x * x
            }
        }
    }

    pub fn has_remainder(&self) -> bool {
        matches!(self, TargetModel::ExponentialMultiLine { lines, .. } if !lines.is_empty())
    }

    /// dR̂_T/dω.
    fn derivative_at(&self, omega: f64) -> Complex64 {
        let dx: Complex64 = self.poles().iter().map(|p| -p.residue / ((omega - p.position) * (omega - p.position))).sum();
        match self {
            TargetModel::Rational { .. } => dx,
            TargetModel::ExponentialMultiLine { .. } => dx * self.response_at(omega),
        }
    }

    /// Narrowest line width, used to size dense scans.
    pub fn min_width(&self) -> f64 {
        match self {
            TargetModel::Rational { lines, .. } => lines.iter().map(|l| l.width).fold(f64::INFINITY, f64::min),
            TargetModel::ExponentialMultiLine { width, .. } => *width,
        }
    }

    fn line_weights(&self) -> Vec<(f64, f64)> {
        match self {
            TargetModel::Rational { lines, .. } => lines.iter().map(|l| (l.residue.norm(), l.center)).collect(),
            TargetModel::ExponentialMultiLine { lines, .. } => lines.iter().map(|l| (l.b, l.center)).collect(),
        }
    }

    /// Amplitude-weighted mean line center.
    pub fn weighted_center(&self) -> f64 {
        let w = self.line_weights();
        let total: f64 = w.iter().map(|x| x.0).sum();
        if total == 0.0 {
            return 0.0;
        }
        w.iter().map(|(a, c)| a * c).sum::<f64>() / total
    }

    fn peak_amplitude(&self) -> f64 {
        let poles = self.poles();
        if poles.is_empty() {
            return self.c0().norm();
        }
        let lo = poles.iter().map(|p| p.position.re).fold(f64::INFINITY, f64::min);
        let hi = poles.iter().map(|p| p.position.re).fold(f64::NEG_INFINITY, f64::max);
        let h = self.min_width() / 40.0;
        let pad = 20.0 * poles.iter().map(|p| -2.0 * p.position.im).fold(0.0, f64::max);
        let n = ((hi - lo + 2.0 * pad) / h).ceil() as usize;
        let mut peak = self.c0().norm();
        let mut best_k = 0;
        for k in 0..=n {
            let v = self.response_at(lo - pad + k as f64 * h).norm();
            if v > peak {
                peak = v;
                best_k = k;
            }
        }
        // golden-section refinement around the best sample
        let (mut a, mut b) = (lo - pad + (best_k as f64 - 1.0) * h, lo - pad + (best_k as f64 + 1.0) * h);
        let r = 0.5 * (5f64.sqrt() - 1.0);
        for _ in 0..60 {
            let c = b - r * (b - a);
            let d = a + r * (b - a);
            if self.response_at(c).norm() > self.response_at(d).norm() {
                b = d;
            } else {
                a = c;
            }
        }
        peak.max(self.response_at(0.5 * (a + b)).norm())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetPreset {
    SingleLine,
    TwoLine,
    ZeemanSixLine,
}

/// Peak |R̂_T| the multi-line presets are scaled to.
pub const PRESET_PEAK: f64 = 0.95;

impl TargetPreset {
    pub fn name(&self) -> &'static str {
        match self {
            TargetPreset::SingleLine => "single_line",
            TargetPreset::TwoLine => "two_line",
            TargetPreset::ZeemanSixLine => "zeeman_six_line",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "single_line" => Ok(TargetPreset::SingleLine),
            "two_line" => Ok(TargetPreset::TwoLine),
            "zeeman_six_line" | "zeeman" => Ok(TargetPreset::ZeemanSixLine),
            _ => Err(Error::Config(format!("unknown target preset '{name}'"))),
        }
    }

    pub fn all() -> [TargetPreset; 3] {
        [TargetPreset::SingleLine, TargetPreset::TwoLine, TargetPreset::ZeemanSixLine]
    }

    pub fn model(&self) -> TargetModel {
        let line = |w: f64, center: f64, width: f64| RationalLine { residue: -I * 0.5 * width * w, center, width };
        let zero = Complex64::new(0.0, 0.0);
        let lines = match self {
            TargetPreset::SingleLine => {
                return TargetModel::Rational { c0: zero, lines: vec![line(1.0, 0.0, 2.0)] };
            }
            TargetPreset::TwoLine => vec![line(1.0, -20.0, 8.0), line(1.0, 20.0, 8.0)],
            TargetPreset::ZeemanSixLine => [(-60.0, 1.0), (-35.0, 2.0), (-10.0, 3.0), (10.0, 3.0), (35.0, 2.0), (60.0, 1.0)]
                .iter()
                .map(|&(c, w)| line(w, c, 2.0))
                .collect(),
        };
        let raw = TargetModel::Rational { c0: zero, lines: lines.clone() };
        let scale = PRESET_PEAK / raw.peak_amplitude();
        TargetModel::Rational {
            c0: zero,
            lines: lines.into_iter().map(|l| RationalLine { residue: l.residue * scale, ..l }).collect(),
        }
    }
}

pub fn target_response_freq(m: &TargetModel, g: &FrequencyGrid) -> ComplexSpectrum {
    ComplexSpectrum::from_fn(*g, |w| m.response_at(w))
}

/// R_T(t) on a grid centred on t = 0 (the dual of some frequency grid). The asymptote c₀
/// is carried as the δ weight.
pub fn target_response_time(m: &TargetModel, g: &TimeGrid) -> Result<TimeSignal> {
    let n = g.count;
    if n < 2 || !n.is_power_of_two() || (g.start + (n / 2) as f64 * g.spacing).abs() > 1e-9 * g.spacing {
        return Err(Error::GridMismatch("target time response needs a grid dual to a frequency grid".into()));
    }
    let poles = m.poles();
    let pairs = m.pole_pairs();
    let mut values: Vec<Complex64> = g
        .times()
        .into_iter()
        .map(|t| poles.iter().map(|p| p.time(t)).sum::<Complex64>() + pairs.iter().map(|p| p.time(t)).sum::<Complex64>())
        .collect();
    if m.has_remainder() {
        let fg = FrequencyGrid::new(0.0, 2.0 * std::f64::consts::PI / (n as f64 * g.spacing), n)?;
        let mut buf: Vec<Complex64> = fg.omegas().into_iter().map(|w| m.remainder_at(w)).collect();
        freq_to_time_in_place(&fg, &mut buf);
        // the remainder is causal and vanishes at t = 0; drop the truncation leakage before it
        for ((v, r), t) in values.iter_mut().zip(buf).zip(g.times()) {
            if t > 0.0 {
                *v += r;
            }
        }
    }
    Ok(TimeSignal { grid: *g, values, delta: m.c0() })
}

/// Below this amplitude the phase, and hence the group delay, is undefined.
pub const PHASE_AMPLITUDE_FLOOR: f64 = 1e-9;

/// τ(ω) = ∂ arg R̂_T/∂ω = Im(R̂_T'/R̂_T), evaluated analytically.
pub fn target_group_delay(m: &TargetModel, omega: f64) -> Result<f64> {
    let r = m.response_at(omega);
    if r.norm() < PHASE_AMPLITUDE_FLOOR {
        return Err(Error::UndefinedPhase { omega, amplitude: r.norm() });
    }
    Ok((m.derivative_at(omega) / r).im)
}

/// Smallest l with |R̂_T(ω) − c₀| < ε for every |ω − ω_c| > l, ω_c the weighted line center.
pub fn target_support_halfwidth(m: &TargetModel, eps: f64) -> Result<f64> {
    if !(eps > 0.0 && eps <= 0.1) {
        return Err(Error::Domain(format!("support tolerance must lie in (0, 0.1], got {eps}")));
    }
    let w = m.line_weights();
    if w.iter().all(|x| x.0 == 0.0) {
        return Ok(0.0);
    }
    let center = m.weighted_center();
    let c0 = m.c0();
    let dev = |x: f64| (m.response_at(x) - c0).norm();
    let reach = w.iter().map(|(_, c)| (c - center).abs()).fold(0.0, f64::max);
    let total: f64 = w.iter().map(|x| x.0).sum();
    let bound = match m {
        TargetModel::Rational { .. } => total / eps,
        TargetModel::ExponentialMultiLine { .. } => total / (1.0 + eps).ln(),
    };
    let outer = reach + bound + m.min_width();
    let h = m.min_width() / 50.0;
    let steps = (outer / h).ceil() as usize;
    let mut l: f64 = 0.0;
    for side in [1.0, -1.0] {
        // walk inwards from the certified outer bound to the first violation
        let mut k = steps;
        while k > 0 && dev(center + side * k as f64 * h) < eps {
            k -= 1;
        }
        if k == steps {
            return Err(Error::Domain("support bound not certified".into()));
        }
        let (mut lo, mut hi) = (k as f64 * h, (k + 1) as f64 * h);
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            if dev(center + side * mid) >= eps {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        if dev(center + side * lo) >= eps {
            l = l.max(hi);
        }
    }
    Ok(l)
}

/// Expected scale of |R̂_T| used to normalise comparisons.
pub fn target_peak_amplitude(m: &TargetModel) -> f64 {
    m.peak_amplitude()
}

/// |R̂_T(ω)|² at each ω.
pub fn target_power(m: &TargetModel, omegas: &[f64]) -> Vec<f64> {
    omegas.iter().map(|&w| m.response_at(w).norm_sqr()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cmath::relative_l2;
    use crate::grid::time_to_freq;
    use crate::oracle::periodized;
    use crate::response::AnalyzerSpec;
    use proptest::prelude::*;

    fn single(a: Complex64, center: f64, width: f64) -> TargetModel {
        TargetModel::Rational { c0: Complex64::new(0.0, 0.0), lines: vec![RationalLine { residue: a, center, width }] }
    }

    #[test]
    fn empty_model_is_zero() {
        let m = TargetModel::rational(Complex64::new(0.0, 0.0), vec![]).unwrap();
        let g = FrequencyGrid::new(0.0, 0.5, 64).unwrap();
        assert!(target_response_freq(&m, &g).values.iter().all(|v| v.norm() == 0.0));
        assert_eq!(target_support_halfwidth(&m, 0.01).unwrap(), 0.0);
    }

    #[test]
    fn lorentzian_peak_height() {
        let m = single(Complex64::new(0.0, -0.6), 3.0, 1.5);
        assert!((m.response_at(3.0).norm() - 0.6 / 0.75).abs() < 1e-15);
        assert!((target_peak_amplitude(&m) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn passivity_enforced() {
        let lines = vec![RationalLine { residue: Complex64::new(0.0, -1.2), center: 0.0, width: 2.0 }];
        assert!(TargetModel::rational(Complex64::new(0.0, 0.0), lines).is_err());
        assert!(TargetModel::rational(Complex64::new(1.1, 0.0), vec![]).is_err());
        assert!(TargetModel::exponential(0.0, vec![]).is_err());
        assert!(TargetModel::exponential(1.0, vec![ExponentialLine { b: -1.0, center: 0.0 }]).is_err());
    }

    #[test]
    fn single_exponential_line_is_analyzer() {
        let m = TargetModel::exponential(1.3, vec![ExponentialLine { b: 2.5, center: -4.0 }]).unwrap();
        let a = AnalyzerSpec::new(2.5, 1.3, -4.0).unwrap();
        for k in 0..200 {
            let w = -50.0 + 0.5 * k as f64;
            assert!((m.response_at(w) - a.response_at(w)).norm() < 1e-15);
        }
        let g = FrequencyGrid::new(0.0, 1.0 / 16.0, 8192).unwrap();
        let tg = g.dual();
        let sig = target_response_time(&m, &tg).unwrap();
        assert_eq!(sig.delta, Complex64::new(1.0, 0.0));
        let want: Vec<Complex64> = tg.times().into_iter().map(|t| -a.scattering_time_at(t)).collect();
        assert!(relative_l2(&sig.values, &want) < 1e-6);
    }

    #[test]
    fn presets_shape() {
        let counts: Vec<usize> = TargetPreset::all().iter().map(|p| p.model().poles().len()).collect();
        assert_eq!(counts, vec![1, 2, 6]);
        let s = TargetPreset::SingleLine.model();
        assert_eq!(s.poles()[0].residue, Complex64::new(0.0, -1.0));
        assert!((target_peak_amplitude(&s) - 1.0).abs() < 1e-12);
        for p in [TargetPreset::TwoLine, TargetPreset::ZeemanSixLine] {
            let m = p.model();
            m.validate().unwrap();
            assert!((target_peak_amplitude(&m) - PRESET_PEAK).abs() < 1e-9);
        }
        assert_eq!(TargetPreset::from_name("zeeman_six_line").unwrap(), TargetPreset::ZeemanSixLine);
        assert!(TargetPreset::from_name("cavity").is_err());
    }

    #[test]
    fn zeeman_mirror_symmetry() {
        let m = TargetPreset::ZeemanSixLine.model();
        for k in 0..400 {
            let w = 0.37 * k as f64;
            assert!((m.response_at(w).norm() - m.response_at(-w).norm()).abs() < 1e-14);
        }
    }

    fn causal_oracle(m: &TargetModel) -> f64 {
        let g = FrequencyGrid::new(0.0, 1.0 / 16.0, 8192).unwrap();
        let sig = target_response_time(m, &g.dual()).unwrap();
        assert!(sig.grid.times().iter().zip(&sig.values).all(|(t, v)| *t >= 0.0 || v.norm() < 1e-9));
        let got = time_to_freq(&sig, &g).unwrap();
        let c0 = m.c0();
        let pairs = m.pole_pairs();
        let rem = |w: f64| m.remainder_at(w) + pairs.iter().map(|p| p.freq(w)).sum::<Complex64>();
        let want: Vec<Complex64> = g
            .omegas()
            .into_iter()
            .map(|w| c0 + periodized(w, g.span(), &m.poles(), &[], &rem, if m.has_remainder() { 400 } else { 0 }))
            .collect();
        relative_l2(&got.values, &want)
    }

    #[test]
    fn time_response_oracle_for_presets() {
        for p in TargetPreset::all() {
            let err = causal_oracle(&p.model());
            assert!(err < 1e-6, "{}: {err}", p.name());
        }
        let m = TargetModel::exponential(
            1.0,
            vec![ExponentialLine { b: 1.0, center: -5.0 }, ExponentialLine { b: 2.0, center: 7.0 }],
        )
        .unwrap();
        assert!(causal_oracle(&m) < 1e-6);
    }

    #[test]
    fn single_line_envelope() {
        let m = single(Complex64::new(0.0, -0.5), 2.0, 1.0);
        let g = FrequencyGrid::new(0.0, 0.25, 1024).unwrap().dual();
        let sig = target_response_time(&m, &g).unwrap();
        for (t, v) in g.times().into_iter().zip(&sig.values) {
            if t > 0.0 {
                assert!((v.norm() - 0.5 * (-0.5 * t).exp()).abs() < 1e-15);
            }
        }
        let bad = TimeGrid::new(0.0, 0.1, 1024).unwrap();
        assert!(target_response_time(&m, &bad).is_err());
    }

    fn fd_delay(m: &TargetModel, w: f64, h: f64) -> f64 {
        let up = m.response_at(w + h);
        let dn = m.response_at(w - h);
        (up / dn).arg() / (2.0 * h)
    }

    #[test]
    fn group_delay_cases() {
        let m = single(Complex64::new(0.0, -1.0), 0.0, 2.0);
        assert!(target_group_delay(&m, 1e4).unwrap().abs() < 1e-7);
        let tau = target_group_delay(&m, 0.0).unwrap();
        assert!((tau - fd_delay(&m, 0.0, 1e-5)).abs() < 1e-8);
        assert!((tau - 1.0).abs() < 1e-12);
        let c = TargetModel::rational(Complex64::new(0.3, 0.4), vec![]).unwrap();
        assert_eq!(target_group_delay(&c, 5.0).unwrap(), 0.0);
        let zero = TargetModel::rational(Complex64::new(0.0, 0.0), vec![]).unwrap();
        assert!(matches!(target_group_delay(&zero, 0.0), Err(Error::UndefinedPhase { .. })));
    }

    #[test]
    fn group_delay_matches_finite_differences() {
        for p in TargetPreset::all() {
            let m = p.model();
            for k in 0..400 {
                let w = -100.0 + 0.5 * k as f64 + 0.013;
                if m.response_at(w).norm() > 1e-3 {
                    let a = target_group_delay(&m, w).unwrap();
                    let f = fd_delay(&m, w, 1e-5);
                    assert!((a - f).abs() <= 1e-6 * a.abs().max(1e-3), "{} at {w}: {a} vs {f}", p.name());
                }
            }
        }
        let m = TargetModel::exponential(1.0, vec![ExponentialLine { b: 3.0, center: 1.0 }]).unwrap();
        for w in [-3.0, 0.2, 1.0, 4.0] {
            let a = target_group_delay(&m, w).unwrap();
            assert!((a - fd_delay(&m, w, 1e-5)).abs() < 1e-6 * a.abs().max(1e-3));
        }
    }

    #[test]
    fn support_halfwidth_single_line() {
        let m = single(Complex64::new(0.0, -1.0), 0.0, 1.0);
        let l = target_support_halfwidth(&m, 0.01).unwrap();
        // |−i/(ω + i/2)| = 0.01 ⇔ ω² + 1/4 = 10⁴
        assert!((l - (1e4f64 - 0.25).sqrt()).abs() < 1e-6);
        assert!(target_support_halfwidth(&m, 0.2).is_err());
    }

    #[test]
    fn support_grows_with_spread() {
        let m = TargetPreset::ZeemanSixLine.model();
        let TargetModel::Rational { c0, lines } = &m else { unreachable!() };
        let wide = TargetModel::Rational {
            c0: *c0,
            lines: lines.iter().map(|l| RationalLine { center: 2.0 * l.center, ..*l }).collect(),
        };
        let (l1, l2) = (target_support_halfwidth(&m, 0.05).unwrap(), target_support_halfwidth(&wide, 0.05).unwrap());
        assert!(l2 >= l1);
        let lone = RationalLine { residue: Complex64::new(0.0, -0.1), center: 0.0, width: 0.2 };
        let pair = |x: f64| TargetModel::Rational {
            c0: Complex64::new(0.0, 0.0),
            lines: vec![RationalLine { center: -x, ..lone }, RationalLine { center: x, ..lone }],
        };
        let one = target_support_halfwidth(&single(lone.residue, 0.0, lone.width), 0.05).unwrap();
        let (a, b) = (target_support_halfwidth(&pair(30.0), 0.05).unwrap(), target_support_halfwidth(&pair(60.0), 0.05).unwrap());
        // l ≈ max|ω_j − ω_c| + δ, so doubling the spread gives 2a − δ, not 2a
        assert!(b > a && b >= 2.0 * a - 2.0 * one, "{a} {b} {one}");
    }

    proptest! {
        #[test]
        fn support_is_tight(center in -20.0f64..20.0, width in 0.5f64..4.0, eps in 0.005f64..0.1) {
            let m = single(Complex64::new(0.0, -0.4 * width), center, width);
            let l = target_support_halfwidth(&m, eps).unwrap();
            let dev = |w: f64| m.response_at(w).norm();
            prop_assert!(dev(center + l * 1.001) < eps);
            prop_assert!(dev(center - l * 1.001) < eps);
            prop_assert!(dev(center + l * 0.999) >= eps || dev(center - l * 0.999) >= eps);
        }

        #[test]
        fn presets_passive(w in -500.0f64..500.0) {
            for p in TargetPreset::all() {
                prop_assert!(p.model().response_at(w).norm() <= 1.0 + PASSIVITY_TOL);
            }
        }
    }
}
