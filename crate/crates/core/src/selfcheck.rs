//! Invariant suite run by the `selftest` command.

use std::f64::consts::TAU;

use crate::bessel::{bessel_j_signed, first_j0_zero};
use crate::cmath::relative_l2_real;
use crate::error::Result;
use crate::events::sample_counts;
use crate::filters::{combined_filter, phi0_fourier, phi0_harmonic, FilterParams};
use crate::grid::FrequencyGrid;
use crate::motion::sideband_coefficients;
use crate::oracle::{analyzer_fft_error, oscillating_fft_error, target_fft_error};
use crate::recovery::{fit_cosine, single_sideband_exact};
use crate::response::AnalyzerSpec;
use crate::simulate::{detector_intensity, oracle_spot_check, ExperimentConfig, IntensityGrid};
use crate::target::TargetPreset;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn outcome(name: &'static str, r: Result<(bool, String)>) -> CheckOutcome {
    match r {
        Ok((passed, detail)) => CheckOutcome { name, passed, detail },
        Err(e) => CheckOutcome { name, passed: false, detail: e.to_string() },
    }
}

/// Thin-analyzer single_line experiment on a reduced scan.
pub fn small_config(scan_points: usize) -> Result<ExperimentConfig> {
    let mut cfg = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(0.5)?)?;
    let full = cfg.omega_p_scan.clone();
    let step = (full.len() - 1) / (scan_points.max(2) - 1);
    cfg.omega_p_scan = full.iter().step_by(step.max(1)).copied().take(scan_points).collect();
    cfg.validate()?;
    Ok(cfg)
}

pub fn bessel_sum_rules() -> CheckOutcome {
    outcome(
        "bessel_sum_rules",
        (|| {
            let mut worst = 0.0f64;
            for p in [0.5, first_j0_zero(), 5.0, 12.0] {
                let (mut s1, mut s2) = (0.0, 0.0);
                for n in -80..=80 {
                    let j = bessel_j_signed(n, p)?;
                    s1 += j;
                    s2 += j * j;
                }
                worst = worst.max((s1 - 1.0).abs()).max((s2 - 1.0).abs());
            }
            Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
        })(),
    )
}

pub fn fft_oracles() -> CheckOutcome {
    outcome(
        "fft_oracles",
        (|| {
            let g = FrequencyGrid::new(0.0, 1.0 / 16.0, 8192)?;
            let a = AnalyzerSpec::new(4.1, 1.0, 2.5)?;
            let mut worst = analyzer_fft_error(&a, &g)?;
            worst = worst.max(oscillating_fft_error(&a, first_j0_zero(), 1.3, 7.0, &g)?);
            for p in TargetPreset::all() {
                worst = worst.max(target_fft_error(&p.model(), &g)?);
            }
            Ok((worst < 1e-6, format!("max relative L2 {worst:.2e}")))
        })(),
    )
}

pub fn detector_oracle() -> CheckOutcome {
    outcome(
        "detector_time_oracle",
        (|| {
            let cfg = small_config(3)?;
            let scan = cfg.omega_p_scan[1];
            let err = oracle_spot_check(&cfg, 0.7, scan, 8)?;
            Ok((err < 1e-5, format!("relative L2 {err:.2e}")))
        })(),
    )
}

/// φ₀-DFT of α_n α_m* has the single component f = m − n with weight J_n J_m.
pub fn sideband_products() -> CheckOutcome {
    outcome(
        "sideband_products",
        (|| {
            let m_phi = 32;
            let phis: Vec<f64> = (0..m_phi).map(|k| TAU * k as f64 / m_phi as f64).collect();
            let mut worst = 0.0f64;
            for p in [0.5, first_j0_zero()] {
                let exps: Vec<_> = phis.iter().map(|&phi| sideband_coefficients(p, phi, 1e-14)).collect::<Result<_>>()?;
                for n in -4..=4 {
                    for m in -4..=4 {
                        let prod: Vec<_> = exps.iter().map(|e| e.coefficient(n) * e.coefficient(m).conj()).collect();
                        let want = bessel_j_signed(n, p)? * bessel_j_signed(m, p)?;
                        for f in -8..=8 {
                            let c = phi0_harmonic(&phis, &prod, f);
                            let target = if f == m - n { want } else { 0.0 };
                            worst = worst.max((c - target).norm());
                        }
                    }
                }
            }
            Ok((worst < 1e-10, format!("max deviation {worst:.2e}")))
        })(),
    )
}

/// Without an analyzer the intensity carries no φ₀ dependence.
pub fn it_elimination() -> CheckOutcome {
    outcome(
        "it_elimination",
        (|| {
            let mut cfg = small_config(3)?;
            cfg.analyzer.b = 0.0;
            let grid = detector_intensity(&cfg)?;
            let comps = phi0_fourier(&grid, 2)?;
            let dc = comps.slice(0, 0).unwrap_or(&[]).iter().map(|v| v.norm()).fold(0.0, f64::max);
            let mut worst = 0.0f64;
            for &f in &comps.f_values {
                if f != 0 {
                    for i in 0..grid.omega_p.len() {
                        worst = worst.max(comps.slice(f, i).unwrap_or(&[]).iter().map(|v| v.norm()).fold(0.0, f64::max));
                    }
                }
            }
            let rel = worst / dc;
            Ok((rel < 1e-12, format!("max |I^f|/|I^0| for f != 0: {rel:.2e}")))
        })(),
    )
}

/// Filtered signal against the exact first-sideband product on [15, 110] ns.
pub fn single_sideband_equivalence(cfg: &ExperimentConfig, grid: &IntensityGrid) -> CheckOutcome {
    outcome(
        "single_sideband_equivalence",
        (|| {
            let fs = combined_filter(grid, &FilterParams::for_config(cfg))?;
            let ts = fs.times_ns();
            let keep: Vec<usize> = (0..ts.len()).filter(|&j| ts[j] <= 110.0 + 1e-9).collect();
            let (mut got, mut want) = (Vec::new(), Vec::new());
            for (i, &scan) in cfg.omega_p_scan.iter().enumerate() {
                for (k, &phi) in cfg.phi0_axis().iter().enumerate() {
                    let pred = single_sideband_exact(cfg, phi, scan)?;
                    let tr = fs.trace(i, k);
                    got.extend(keep.iter().map(|&j| tr[j]));
                    want.extend(keep.iter().map(|&j| pred[j]));
                }
            }
            let err = relative_l2_real(&got, &want);
            Ok((err < 0.1, format!("relative L2 {err:.3e}")))
        })(),
    )
}

/// Per (scan, t) column: Parseval over φ₀ holds and harmonics above |f| = M/2 − 4 carry
/// no energy. A corrupted sample spreads energy over every harmonic and fails this.
pub fn parseval(grid: &IntensityGrid) -> CheckOutcome {
    outcome(
        "parseval",
        (|| {
            let m = grid.phi0.len();
            let f_cut = (m / 2).saturating_sub(4) as i32;
            let mut worst_identity = 0.0f64;
            let mut worst_high = 0.0f64;
            let mut column = vec![0.0; m];
            for i in 0..grid.omega_p.len() {
                for j in 0..grid.time.count {
                    for (k, c) in column.iter_mut().enumerate() {
                        *c = grid.at(i, k, j);
                    }
                    let energy: f64 = column.iter().map(|v| v * v).sum();
                    if energy == 0.0 {
                        continue;
                    }
                    let (mut total, mut high) = (0.0, 0.0);
                    for f in -(m as i32 / 2) + 1..=(m as i32 / 2) {
                        let e = m as f64 * phi0_harmonic(&grid.phi0, &column, f).norm_sqr();
                        total += e;
                        if f.abs() > f_cut {
                            high += e;
                        }
                    }
                    worst_identity = worst_identity.max((total - energy).abs() / energy);
                    worst_high = worst_high.max(high / energy);
                }
            }
            let ok = worst_identity < 1e-10 && worst_high < 1e-9;
            Ok((ok, format!("identity {worst_identity:.2e}, energy above |f| = {f_cut}: {worst_high:.2e}")))
        })(),
    )
}

pub fn cosine_fit_exactness() -> CheckOutcome {
    outcome(
        "cosine_fit_exactness",
        (|| {
            let phis: Vec<f64> = (0..16).map(|k| TAU * k as f64 / 16.0).collect();
            let mut worst = 0.0f64;
            for (d, a) in [(2.0, 0.7), (0.3, 5.9), (1e-3, 3.0)] {
                let vals: Vec<f64> = phis.iter().map(|p| d * (p + a).cos()).collect();
                let (dd, aa, res) = fit_cosine(&phis, &vals)?;
                worst = worst.max((dd - d).abs() / d).max((aa - a).abs()).max(res / d);
            }
            Ok((worst < 1e-12, format!("max deviation {worst:.2e}")))
        })(),
    )
}

pub fn event_determinism(grid: &IntensityGrid) -> CheckOutcome {
    outcome(
        "event_determinism",
        (|| {
            let a = sample_counts(grid, 1e6, 42)?;
            let b = sample_counts(grid, 1e6, 42)?;
            Ok((a == b, format!("{} events", a.iter().sum::<u64>())))
        })(),
    )
}

/// Full suite. Grid-level checks use `grid` when given, otherwise a freshly simulated one.
pub fn run_all(grid: Option<&IntensityGrid>) -> Vec<CheckOutcome> {
    let mut out = vec![bessel_sum_rules(), fft_oracles(), detector_oracle(), sideband_products(), it_elimination(), cosine_fit_exactness()];
    let fresh = small_config(5).and_then(|cfg| detector_intensity(&cfg).map(|g| (cfg, g)));
    match fresh {
        Ok((cfg, g)) => {
            out.push(single_sideband_equivalence(&cfg, &g));
            let target = grid.unwrap_or(&g);
            out.push(parseval(target));
            out.push(event_determinism(target));
        }
        Err(e) => out.push(CheckOutcome { name: "simulate", passed: false, detail: e.to_string() }),
    }
    out
}
