//! Poisson photon sampling and re-binning of event lists.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::TimeGrid;
use crate::simulate::{ExperimentConfig, IntensityGrid};

/// One detected photon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub t_ns: f64,
    pub phi0: f64,
    pub omega_p: f64,
    pub p: f64,
}

/// Poisson counts per cell, in the [`IntensityGrid`] layout, with expected total `mean_counts`.
///
/// Each scan slice draws from its own ChaCha8 stream keyed by `seed`, so the
/// result does not depend on thread scheduling.
pub fn sample_counts(grid: &IntensityGrid, mean_counts: f64, seed: u64) -> Result<Vec<u64>> {
    if !(mean_counts >= 0.0 && mean_counts.is_finite()) {
        return Err(Error::Domain(format!("mean_counts must be finite and non-negative, got {mean_counts}")));
    }
    let total: f64 = grid.values.iter().sum();
    let slice = grid.phi0.len() * grid.time.count;
    if total == 0.0 || mean_counts == 0.0 || slice == 0 {
        return Ok(vec![0; grid.values.len()]);
    }
    let scale = mean_counts / total;
    let counts: Vec<Vec<u64>> = grid
        .values
        .par_chunks(slice)
        .enumerate()
        .map(|(i, cells)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            cells
                .iter()
                .map(|&v| {
                    let lambda = v * scale;
                    if lambda > 0.0 {
                        Poisson::new(lambda).map(|d| d.sample(&mut rng) as u64).unwrap_or(0)
                    } else {
                        0
                    }
                })
                .collect()
        })
        .collect();
    Ok(counts.concat())
}

/// Expand [`sample_counts`] into one record per photon, placed at the cell's sample point.
pub fn sample_events(grid: &IntensityGrid, mean_counts: f64, seed: u64) -> Result<Vec<EventRecord>> {
    let counts = sample_counts(grid, mean_counts, seed)?;
    let times = grid.times_ns();
    let p = grid.meta.p;
    let mut out = Vec::with_capacity(counts.iter().sum::<u64>() as usize);
    for (i, &w) in grid.omega_p.iter().enumerate() {
        for (k, &phi) in grid.phi0.iter().enumerate() {
            for (j, &t) in times.iter().enumerate() {
                let n = counts[grid.index(i, k, j)];
                out.extend((0..n).map(|_| EventRecord { t_ns: t, phi0: phi, omega_p: w, p }));
            }
        }
    }
    Ok(out)
}

/// Histogram of an event list on given axes.
#[derive(Debug, Clone, PartialEq)]
pub struct EventHistogram {
    pub grid: IntensityGrid,
    /// Events that fell outside every bin.
    pub overflow: u64,
}

/// Bin events onto the axes of `axes`; each bin is centred on its sample point.
pub fn histogram_events(events: &[EventRecord], axes: &IntensityGrid) -> Result<EventHistogram> {
    let m = axes.phi0.len();
    let n_t = axes.time.count;
    let mut values = vec![0.0; axes.values.len()];
    let mut overflow = 0u64;
    for e in events {
        match locate(e, &axes.time, &axes.phi0, &axes.omega_p, &axes.meta) {
            Some((i, k, j)) => values[(i * m + k) * n_t + j] += 1.0,
            None => overflow += 1,
        }
    }
    let grid = IntensityGrid::new(axes.time, axes.phi0.clone(), axes.omega_p.clone(), values, axes.meta.clone())?;
    Ok(EventHistogram { grid, overflow })
}

fn locate(e: &EventRecord, time: &TimeGrid, phi0: &[f64], scan: &[f64], meta: &ExperimentConfig) -> Option<(usize, usize, usize)> {
    if (e.p - meta.p).abs() > 1e-12 * meta.p.abs().max(1.0) {
        return None;
    }
    let unit = meta.nuclide.time_unit_ns();
    let u = (e.t_ns / unit - time.start) / time.spacing;
    let j = u.round();
    if !(j >= 0.0 && j < time.count as f64) {
        return None;
    }
    if !(0.0..TAU).contains(&e.phi0) || phi0.is_empty() {
        return None;
    }
    let k = ((e.phi0 - phi0[0]) / (TAU / phi0.len() as f64)).round().rem_euclid(phi0.len() as f64) as usize;
    let i = nearest_scan(scan, e.omega_p)?;
    Some((i, k, j as usize))
}

fn nearest_scan(scan: &[f64], w: f64) -> Option<usize> {
    let (i, d) = scan.iter().enumerate().map(|(i, &s)| (i, (s - w).abs())).min_by(|a, b| a.1.total_cmp(&b.1))?;
    let half_gap = if scan.len() == 1 {
        1e-9 * w.abs().max(1.0)
    } else {
        let lo = if i > 0 { scan[i] - scan[i - 1] } else { f64::INFINITY };
        let hi = if i + 1 < scan.len() { scan[i + 1] - scan[i] } else { f64::INFINITY };
        0.5 * lo.abs().min(hi.abs())
    };
    (d <= half_gap).then_some(i)
}

/// Pearson statistic of observed against expected counts, conditioned on the total.
pub fn chi_square(observed: &[u64], weights: &[f64]) -> f64 {
    let n: u64 = observed.iter().sum();
    let w: f64 = weights.iter().sum();
    observed
        .iter()
        .zip(weights)
        .map(|(&o, &p)| {
            let e = n as f64 * p / w;
            (o as f64 - e).powi(2) / e
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::response::AnalyzerSpec;
    use crate::target::TargetPreset;

    fn toy(values: Vec<f64>) -> IntensityGrid {
        let mut cfg = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(0.5).unwrap()).unwrap();
        cfg.phi0_count = 1;
        cfg.omega_p_scan = vec![cfg.offset];
        let time = TimeGrid::new(0.2, 0.1, values.len()).unwrap();
        IntensityGrid::new(time, vec![0.0], cfg.omega_p_scan.clone(), values, cfg).unwrap()
    }

    #[test]
    fn zero_mean_gives_no_events() {
        let g = toy(vec![1.0, 2.0, 3.0]);
        assert!(sample_events(&g, 0.0, 1).unwrap().is_empty());
        assert!(sample_events(&g, 1e-300, 1).unwrap().is_empty());
    }

    #[test]
    fn fixed_seed_is_reproducible() {
        let g = toy(vec![1.0, 2.0, 3.0, 0.5]);
        assert_eq!(sample_events(&g, 500.0, 9).unwrap(), sample_events(&g, 500.0, 9).unwrap());
        assert_ne!(sample_counts(&g, 500.0, 9).unwrap(), sample_counts(&g, 500.0, 10).unwrap());
    }

    #[test]
    fn counts_follow_intensity() {
        // 10⁴ repeats on three cells; χ²(2 dof) at 1% is 9.2103.
        let w = vec![1.0, 2.0, 5.0];
        let g = toy(w.clone());
        let mut tally = [0u64; 3];
        for seed in 0..10_000u64 {
            let c = sample_counts(&g, 20.0, seed).unwrap();
            for (t, v) in tally.iter_mut().zip(c) {
                *t += v;
            }
        }
        let chi = chi_square(&tally, &w);
        assert!(chi < 9.2103, "χ² = {chi}");
        let mean = tally.iter().sum::<u64>() as f64 / 10_000.0;
        assert!((mean - 20.0).abs() < 5.0 * (20.0f64 / 10_000.0).sqrt());
    }

    #[test]
    fn histogram_inverts_sampling() {
        let g = toy(vec![1.0, 2.0, 3.0]);
        let ev = sample_events(&g, 1000.0, 3).unwrap();
        let h = histogram_events(&ev, &g).unwrap();
        assert_eq!(h.overflow, 0);
        let c = sample_counts(&g, 1000.0, 3).unwrap();
        assert_eq!(h.grid.values, c.iter().map(|&v| v as f64).collect::<Vec<_>>());
    }

    #[test]
    fn empty_and_stray_events() {
        let g = toy(vec![1.0, 2.0, 3.0]);
        let h = histogram_events(&[], &g).unwrap();
        assert!(h.grid.values.iter().all(|&v| v == 0.0));
        let unit = g.meta.nuclide.time_unit_ns();
        let stray = [
            EventRecord { t_ns: 5.0 * unit, phi0: 0.0, omega_p: g.omega_p[0], p: g.meta.p },
            EventRecord { t_ns: 0.2 * unit, phi0: 7.0, omega_p: g.omega_p[0], p: g.meta.p },
            EventRecord { t_ns: 0.2 * unit, phi0: 0.0, omega_p: g.omega_p[0] + 1.0, p: g.meta.p },
            EventRecord { t_ns: 0.2 * unit, phi0: 0.0, omega_p: g.omega_p[0], p: g.meta.p },
        ];
        let h = histogram_events(&stray, &g).unwrap();
        assert_eq!(h.overflow, 3);
        assert_eq!(h.grid.values[0], 1.0);
    }
}
