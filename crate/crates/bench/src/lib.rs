//! Shared fixtures for the criterion benchmarks under `benches/`.

use sideband_core::response::AnalyzerSpec;
use sideband_core::simulate::{linspace, ExperimentConfig};
use sideband_core::target::TargetPreset;

/// Default experiment for `preset` at b = 0.5 with the scan thinned to `points` values.
pub fn bench_config(preset: TargetPreset, points: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::for_preset(preset, AnalyzerSpec::with_thickness(0.5).expect("valid b")).expect("valid preset");
    let l = cfg.support_halfwidth;
    cfg.omega_p_scan = linspace(cfg.offset - 1.2 * l, cfg.offset + 1.2 * l, points);
    cfg
}
