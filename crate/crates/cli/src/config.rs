//! TOML run configuration.
//!
//! Units: lengths in metres, times in seconds, `g` in m/s^2. The physical
//! parameters `geometry.L`, `geometry.h` and `geometry.g` have no defaults.

use std::path::Path;

use beachlab::dynamics::{CosineMode, GaussianBump};
use beachlab::{DampingLaw, ExpFilter, InitialCondition, Model, SimConfig, SimGrid, TankGeometry};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Tank length (m).
    #[serde(rename = "L")]
    pub length: f64,
    /// Still-water depth (m).
    pub h: f64,
    /// Gravity (m/s^2).
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    /// Horizontal intervals; nodes are `nx + 1`.
    pub nx: usize,
    /// Vertical intervals.
    pub ny: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Beach {
    /// Beach length `delta` (m), `0 < delta < L/2`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Time {
    /// Step (s). Defaults to the dispersion limit `1/omega(k_max)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// Final time (s).
    pub t_final: f64,
    /// Store every `sample_stride` steps; audits need 1.
    #[serde(default = "one")]
    pub sample_stride: usize,
}

fn one() -> usize {
    1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: Model,
    /// Strength of the filter `exp(-alpha (k/k_max)^order)` applied after
    /// every step; 0 turns it off.
    #[serde(default = "default_filter_alpha")]
    pub filter_alpha: f64,
    #[serde(default = "default_filter_order")]
    pub filter_order: u32,
}

fn default_filter_alpha() -> f64 {
    ExpFilter::default().alpha
}

fn default_filter_order() -> u32 {
    ExpFilter::default().order
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DampingSection {
    pub law: DampingLaw,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ic {
    /// `eta_0 = sum a cos(n pi x / L)` (m).
    #[serde(default)]
    pub eta_modes: Vec<CosineMode>,
    /// `psi_0 = sum a cos(n pi x / L)` (m^2/s).
    #[serde(default)]
    pub psi_modes: Vec<CosineMode>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bump: Option<GaussianBump>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    /// Times (s) at which `(x, eta, psi, P)` snapshots are written; each is
    /// taken at the nearest step.
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Audit {
    /// Largest accepted relative residual.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Splitting parameter of the decay estimate; defaults to `(1/2 - c)/2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Number of windows for the contraction ratios.
    #[serde(default = "default_windows")]
    pub windows: usize,
}

fn default_tolerance() -> f64 {
    2e-2
}

fn default_windows() -> usize {
    4
}

impl Default for Audit {
    fn default() -> Self {
        Self {
            tolerance: default_tolerance(),
            alpha: None,
            windows: default_windows(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    /// Beach lengths (m) to run.
    pub deltas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub geometry: Geometry,
    pub grid: Grid,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beach: Option<Beach>,
    pub time: Time,
    pub model: ModelSection,
    pub damping: DampingSection,
    pub ic: Ic,
    #[serde(default)]
    pub output: Output,
    #[serde(default)]
    pub audit: Audit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<Sweep>,
}

/// Cutoff on the circle: `amplitude * bump` on `(center - half_width, center + half_width)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleChi {
    pub amplitude: f64,
    pub center: f64,
    pub half_width: f64,
}

/// One real mode `a cos(n x) + b sin(n x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RealMode {
    pub n: usize,
    #[serde(default)]
    pub a: f64,
    #[serde(default)]
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleSection {
    /// Mode cutoff `N`.
    #[serde(default = "default_n")]
    pub n_max: usize,
    /// Step; defaults to `1/sqrt(N)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    /// The run covers `[0, 2 T_long]`.
    pub t_long: f64,
    pub s_list: Vec<f64>,
    /// No cutoff means `chi = 0`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<CircleChi>,
    #[serde(default)]
    pub eta_modes: Vec<RealMode>,
    #[serde(default)]
    pub psi_modes: Vec<RealMode>,
    /// Store every `stride` steps in the norms CSV.
    #[serde(default = "one")]
    pub stride: usize,
}

fn default_n() -> usize {
    128
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircleConfig {
    pub circle: CircleSection,
}

const REQUIRED: [(&str, &str); 9] = [
    ("geometry", "L"),
    ("geometry", "h"),
    ("geometry", "g"),
    ("grid", "nx"),
    ("grid", "ny"),
    ("time", "t_final"),
    ("model", "kind"),
    ("damping", "law"),
    ("ic", ""),
];

fn read(path: &Path) -> Result<toml::Table, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
    text.parse::<toml::Table>()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Reads and checks a run configuration; missing keys are named.
pub fn load_run(path: &Path) -> Result<RunConfig, CliError> {
    let table = read(path)?;
    for (section, key) in REQUIRED {
        let sec = table.get(section).and_then(|v| v.as_table());
        let missing = match (sec, key) {
            (None, _) => true,
            (Some(_), "") => false,
            (Some(t), k) => !t.contains_key(k),
        };
        if missing {
            let name = if key.is_empty() { section.to_string() } else { format!("{section}.{key}") };
            return Err(CliError::Input(format!("{}: missing required key `{name}`", path.display())));
        }
    }
    let cfg: RunConfig = toml::Value::Table(table)
        .try_into()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    cfg.sim_config(None)?;
    Ok(cfg)
}

pub fn load_circle(path: &Path) -> Result<CircleConfig, CliError> {
    let table = read(path)?;
    toml::Value::Table(table)
        .try_into()
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

impl RunConfig {
    /// Core configuration, optionally with another beach length.
    pub fn sim_config(&self, delta: Option<f64>) -> Result<SimConfig, CliError> {
        let g = &self.geometry;
        let geo = TankGeometry::new(g.length, g.h, g.g).map_err(|e| CliError::Input(e.to_string()))?;
        let grid = SimGrid::new(self.grid.nx, self.grid.ny).map_err(|e| CliError::Input(e.to_string()))?;
        let dt = self.time.dt.unwrap_or_else(|| SimConfig::max_stable_dt(&geo, &grid));
        let cfg = SimConfig {
            geo,
            grid,
            beach_delta: delta.or(self.beach.as_ref().map(|b| b.delta)),
            dt,
            t_final: self.time.t_final,
            model: self.model.kind,
            damping: self.damping.law,
            ic: InitialCondition {
                eta_modes: self.ic.eta_modes.clone(),
                psi_modes: self.ic.psi_modes.clone(),
                bump: self.ic.bump,
            },
            sample_stride: self.time.sample_stride,
            filter: (self.model.filter_alpha != 0.0).then_some(ExpFilter {
                alpha: self.model.filter_alpha,
                order: self.model.filter_order,
            }),
        };
        cfg.validate().map_err(|e| CliError::Input(e.to_string()))?;
        if let Some(d) = cfg.beach_delta {
            beachlab::BeachProfile::build(&geo, &grid, d).map_err(|e| CliError::Input(e.to_string()))?;
        }
        cfg.ic.build(&geo, &grid).map_err(|e| CliError::Input(e.to_string()))?;
        Ok(cfg)
    }

    /// Same run with the grid refined `factor` times and the step divided by it.
    pub fn refined(&self, factor: usize) -> RunConfig {
        let mut out = self.clone();
        out.grid.nx *= factor;
        out.grid.ny *= factor;
        let geo = TankGeometry::new(self.geometry.length, self.geometry.h, self.geometry.g);
        let base_dt = match (self.time.dt, geo, SimGrid::new(self.grid.nx, self.grid.ny)) {
            (Some(dt), _, _) => dt,
            (None, Ok(geo), Ok(grid)) => SimConfig::max_stable_dt(&geo, &grid),
            _ => f64::NAN,
        };
        out.time.dt = Some(base_dt / factor as f64);
        out
    }
}
