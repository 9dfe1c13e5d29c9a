//! CSV, JSON and SVG persistence.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::evaluation::SweepResult;
use crate::events::EventRecord;
use crate::recovery::RecoveredSpectrum;
use crate::simulate::IntensityGrid;

/// 17 significant digits, enough to round-trip any f64.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    serde_json::to_string_pretty(value).map_err(|e| Error::Serialization(e.to_string()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    write_text(path, &to_json(value)?)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Serialization(format!("{}: {e}", path.display())))
}

/// Columns t_ns, phi0_rad, omega_p_gamma, intensity.
pub fn grid_csv(grid: &IntensityGrid) -> String {
    let ts = grid.times_ns();
    let mut s = String::from("t_ns,phi0_rad,omega_p_gamma,intensity\n");
    for (i, &w) in grid.omega_p.iter().enumerate() {
        for (k, &phi) in grid.phi0.iter().enumerate() {
            for (j, &t) in ts.iter().enumerate() {
                let _ = writeln!(s, "{},{},{},{}", fmt17(t), fmt17(phi), fmt17(w), fmt17(grid.at(i, k, j)));
            }
        }
    }
    s
}

pub fn events_csv(events: &[EventRecord]) -> String {
    let mut s = String::from("t_ns,phi0_rad,omega_p_gamma,p\n");
    for e in events {
        let _ = writeln!(s, "{},{},{},{}", fmt17(e.t_ns), fmt17(e.phi0), fmt17(e.omega_p), fmt17(e.p));
    }
    s
}

/// Columns detuning_gamma, amplitude_sq, phase_rad (empty when no phase was recovered).
pub fn spectrum_csv(rec: &RecoveredSpectrum) -> String {
    let mut s = String::from("detuning_gamma,amplitude_sq,phase_rad\n");
    for (k, &d) in rec.detuning.iter().enumerate() {
        let ph = rec.phase.as_ref().map(|p| fmt17(p[k])).unwrap_or_default();
        let _ = writeln!(s, "{},{},{}", fmt17(d), fmt17(rec.amplitude_sq[k]), ph);
    }
    s
}

/// Rows t₁, columns t₂; undefined cells are empty.
pub fn sweep_csv(sweep: &SweepResult) -> String {
    let mut s = String::from("t1_ns");
    for &t2 in &sweep.t2_ns {
        let _ = write!(s, ",{t2}");
    }
    s.push('\n');
    for (i, &t1) in sweep.t1_ns.iter().enumerate() {
        let _ = write!(s, "{t1}");
        for cell in &sweep.error[i] {
            s.push(',');
            if let Some(e) = cell {
                s.push_str(&fmt17(*e));
            }
        }
        s.push('\n');
    }
    s
}

/// (t₁, t₂, error) triples for external plotting.
pub fn sweep_triples_csv(sweep: &SweepResult) -> String {
    let mut s = String::from("t1_ns,t2_ns,error\n");
    for (i, &t1) in sweep.t1_ns.iter().enumerate() {
        for (j, &t2) in sweep.t2_ns.iter().enumerate() {
            if let Some(e) = sweep.error[i][j] {
                let _ = writeln!(s, "{t1},{t2},{}", fmt17(e));
            }
        }
    }
    s
}

const W: f64 = 640.0;
const H: f64 = 400.0;
const M: f64 = 50.0;

fn extent(v: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = v.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(x), b.max(x)));
    if lo < hi {
        (lo, hi)
    } else {
        (lo - 0.5, lo + 0.5)
    }
}

/// Line plot of one or more (x, y) series sharing the axes.
pub fn svg_lines(title: &str, series: &[(&str, &[f64], &[f64])]) -> String {
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let (x0, x1) = extent(series.iter().flat_map(|s| s.1.iter().copied()));
    let (y0, y1) = extent(series.iter().flat_map(|s| s.2.iter().copied()));
    let sx = |x: f64| M + (x - x0) / (x1 - x0) * (W - 2.0 * M);
    let sy = |y: f64| H - M - (y - y0) / (y1 - y0) * (H - 2.0 * M);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n\
         <rect x=\"{M}\" y=\"{M}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n\
         <text x=\"{M}\" y=\"30\">{}</text>\n\
         <text x=\"{M}\" y=\"{}\">{x0:.3}</text><text x=\"{}\" y=\"{}\" text-anchor=\"end\">{x1:.3}</text>\n",
        W - 2.0 * M,
        H - 2.0 * M,
        escape(title),
        H - M + 18.0,
        W - M,
        H - M + 18.0
    );
    for (n, (label, xs, ys)) in series.iter().enumerate() {
        let c = COLORS[n % COLORS.len()];
        let pts: Vec<String> = xs.iter().zip(ys.iter()).map(|(&x, &y)| format!("{:.2},{:.2}", sx(x), sy(y))).collect();
        let _ = writeln!(s, "<polyline fill=\"none\" stroke=\"{c}\" points=\"{}\"/>", pts.join(" "));
        let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" fill=\"{c}\" text-anchor=\"end\">{}</text>", W - M - 5.0, M + 15.0 * (n + 1) as f64, escape(label));
    }
    s.push_str("</svg>\n");
    s
}

/// Heatmap of a sweep; darker is lower error, undefined cells are left blank.
pub fn svg_heatmap(title: &str, sweep: &SweepResult) -> String {
    let defined: Vec<f64> = sweep.error.iter().flatten().flatten().copied().collect();
    let (lo, hi) = extent(defined.iter().copied());
    let (n1, n2) = (sweep.t1_ns.len().max(1) as f64, sweep.t2_ns.len().max(1) as f64);
    let (cw, ch) = ((W - 2.0 * M) / n1, (H - 2.0 * M) / n2);
    let mut s = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{W}\" height=\"{H}\">\n<text x=\"{M}\" y=\"30\">{}</text>\n",
        escape(title)
    );
    for (i, row) in sweep.error.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if let Some(e) = cell {
                let g = (255.0 * (e - lo) / (hi - lo)).round().clamp(0.0, 255.0) as u8;
                let _ = writeln!(
                    s,
                    "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{cw:.2}\" height=\"{ch:.2}\" fill=\"rgb({g},{g},255)\"><title>{} {} {e:.4e}</title></rect>",
                    M + i as f64 * cw,
                    H - M - (j + 1) as f64 * ch,
                    sweep.t1_ns[i],
                    sweep.t2_ns[j]
                );
            }
        }
    }
    let _ = writeln!(s, "<text x=\"{M}\" y=\"{}\">t1 (ns)</text><text x=\"10\" y=\"{M}\">t2</text>", H - 15.0);
    s.push_str("</svg>\n");
    s
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::TimeGrid;
    use crate::recovery::Method;
    use crate::response::AnalyzerSpec;
    use crate::simulate::ExperimentConfig;
    use crate::target::TargetPreset;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, 2.404825557695773, 1e-300, -7.25e12, f64::MIN_POSITIVE] {
            assert_eq!(fmt17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn grid_json_is_bit_exact_and_csv_has_all_rows() {
        let cfg = ExperimentConfig::for_preset(TargetPreset::SingleLine, AnalyzerSpec::with_thickness(0.5).unwrap()).unwrap();
        let vals = vec![0.1, 1.0 / 3.0, 2.0f64.sqrt(), 1e-17];
        let g = IntensityGrid::new(TimeGrid::new(0.1, 0.01, 2).unwrap(), vec![0.0], vec![1.0, 2.0], vals, cfg).unwrap();
        let back: IntensityGrid = serde_json::from_str(&to_json(&g).unwrap()).unwrap();
        assert_eq!(back, g);
        let csv = grid_csv(&g);
        assert_eq!(csv.lines().count(), 5);
        let last: f64 = csv.lines().last().unwrap().rsplit(',').next().unwrap().parse().unwrap();
        assert_eq!(last, 1e-17);
    }

    #[test]
    fn sweep_csv_blanks_undefined() {
        let s = SweepResult {
            t1_ns: vec![15.0],
            t2_ns: vec![10.0, 70.0],
            error: vec![vec![None, Some(0.5)]],
            method: Method::Phantasy,
            config_hash: String::new(),
        };
        assert_eq!(sweep_csv(&s), format!("t1_ns,10,70\n15,,{}\n", fmt17(0.5)));
        assert!(svg_heatmap("x", &s).contains("<rect"));
        assert!(svg_lines("a<b", &[("r", &[0.0, 1.0], &[1.0, 0.0])]).contains("a&lt;b"));
    }
}
