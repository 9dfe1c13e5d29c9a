//! TOML run configuration.
//!
//! ```toml
//! [analyzer]
//! b = 0.5                 # or thickness_um = 1.0
//!
//! [target]
//! preset = "single_line"  # or kind = "rational", c0 = [0.0, 0.0], lines = [...]
//!
//! [motion]
//! kind = "harmonic"       # harmonic | pssl | doppler
//!
//! [scan]
//! points = 161
//!
//! [window]
//! t_min_ns = 15.0
//! t_max_ns = 192.0
//! ```
//!
//! `[nuclide]`, `[motion]`, `[scan]`, `[window]`, `[filter]` and `[output]` may be
//! omitted; `[analyzer]` and `[target]` are required.

use serde::{Deserialize, Serialize};

use crate::bessel::first_j0_zero;
use crate::error::{Error, Result};
use crate::filters::{BandWindow, FilterParams};
use crate::motion::DEFAULT_SIDEBAND_TOL;
use crate::response::AnalyzerSpec;
use crate::simulate::{linspace, ExperimentConfig, MotionKind, TimeWindow};
use crate::target::{TargetModel, TargetPreset};
use crate::units::{thickness_param, NuclideConstants};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub nuclide: NuclideConstants,
    pub analyzer: AnalyzerSection,
    pub target: TargetSection,
    #[serde(default)]
    pub motion: MotionSection,
    #[serde(default)]
    pub scan: ScanSection,
    #[serde(default)]
    pub window: TimeWindow,
    #[serde(default)]
    pub filter: FilterSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzerSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    /// Foil thickness in µm, converted with the nuclide constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thickness_um: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub linewidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resonance_offset: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TargetSection {
    Preset { preset: TargetPreset },
    Model(TargetModel),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MotionSection {
    pub kind: MotionKind,
    /// Modulation depth; p₀ (first zero of J₀) when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sideband_tol: Option<f64>,
}

impl Default for MotionSection {
    fn default() -> Self {
        Self { kind: MotionKind::Harmonic, p: None, sideband_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    /// Offset S (γ); 6l when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub offset: Option<f64>,
    /// Explicit scan values (ω_p, or detuning for Doppler).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Scan half-span in units of l.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub span: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0_count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_halfwidth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_halfwidth: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub window: Option<BandWindow>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_select: Option<Vec<i32>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default)]
    pub events: bool,
    #[serde(default = "default_mean_counts")]
    pub mean_counts: f64,
    #[serde(default)]
    pub svg: bool,
}

fn default_mean_counts() -> f64 {
    1e7
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { events: false, mean_counts: default_mean_counts(), svg: false }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn preset(preset: TargetPreset, b: f64) -> Self {
        Self {
            nuclide: NuclideConstants::default(),
            analyzer: AnalyzerSection { b: Some(b), thickness_um: None, linewidth: None, resonance_offset: None },
            target: TargetSection::Preset { preset },
            motion: MotionSection::default(),
            scan: ScanSection::default(),
            window: TimeWindow::default(),
            filter: FilterSection::default(),
            output: OutputSection::default(),
        }
    }

    pub fn analyzer(&self) -> Result<AnalyzerSpec> {
        let a = &self.analyzer;
        let b = match (a.b, a.thickness_um) {
            (Some(b), None) => b,
            (None, Some(d)) => thickness_param(d, &self.nuclide)?,
            (Some(_), Some(_)) => return Err(Error::Config("[analyzer]: give either b or thickness_um, not both".into())),
            (None, None) => return Err(Error::Config("[analyzer]: missing b or thickness_um".into())),
        };
        AnalyzerSpec::new(b, a.linewidth.unwrap_or(1.0), a.resonance_offset.unwrap_or(0.0))
            .map_err(|e| Error::Config(format!("[analyzer]: {e}")))
    }

    pub fn target(&self) -> Result<TargetModel> {
        let m = match &self.target {
            TargetSection::Preset { preset } => preset.model(),
            TargetSection::Model(m) => m.clone(),
        };
        m.validate().map_err(|e| Error::Config(format!("[target]: {e}")))?;
        Ok(m)
    }

    pub fn experiment(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::for_target(self.target()?, self.analyzer()?)?;
        cfg.nuclide = self.nuclide;
        if let Some(l) = self.scan.support_halfwidth {
            cfg.support_halfwidth = l;
        }
        let l = cfg.support_halfwidth;
        let s = &self.scan;
        let span = s.span.unwrap_or(1.2);
        let points = s.points.unwrap_or(161);
        if points == 0 {
            return Err(Error::Config("[scan]: points must be >= 1".into()));
        }
        cfg.motion = self.motion.kind;
        cfg.p = match self.motion.kind {
            MotionKind::Harmonic => self.motion.p.unwrap_or_else(first_j0_zero),
            _ => 0.0,
        };
        cfg.sideband_tol = self.motion.sideband_tol.unwrap_or(DEFAULT_SIDEBAND_TOL);
        match self.motion.kind {
            MotionKind::Doppler => {
                cfg.offset = s.offset.unwrap_or(0.0);
                cfg.phi0_count = s.phi0_count.unwrap_or(1);
                cfg.omega_p_scan = s.values.clone().unwrap_or_else(|| linspace(-span * l, span * l, points));
            }
            _ => {
                cfg.offset = s.offset.unwrap_or(6.0 * l);
                cfg.phi0_count = s.phi0_count.unwrap_or(32);
                let c = cfg.offset;
                cfg.omega_p_scan = s.values.clone().unwrap_or_else(|| linspace(c - span * l, c + span * l, points));
            }
        }
        cfg.window = self.window;
        cfg.refresh();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn filter_params(&self, cfg: &ExperimentConfig) -> Result<FilterParams> {
        let mut p = FilterParams::for_config(cfg);
        if let Some(w) = self.filter.band_halfwidth {
            p.band_halfwidth = w;
        }
        if let Some(w) = self.filter.window {
            p.window = w;
        }
        if let Some(f) = &self.filter.f_select {
            p.f_select = f.clone();
        }
        p.validate().map_err(|e| Error::Config(format!("[filter]: {e}")))?;
        Ok(p)
    }
}
