//! `key = value` run configuration with `[section]` headers and unit-suffixed
//! keys. Omitted keys keep their defaults.

use std::fmt;
use std::path::PathBuf;

use levsg_core::closure::ClosureSettings;
use levsg_core::dynamics::{NumericSettings, EQUILIBRIUM_BRACKET};
use levsg_core::field::RectQuadrature;
use levsg_core::{ChipConfig, ModelError, Particle, PhysicalConstants, StagePlan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value` or `[section]`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown section `[{name}]`")]
    UnknownSection { line: usize, name: String },
    #[error("line {line}: unknown key `{key}`{}", section_suffix(.section))]
    UnknownKey {
        line: usize,
        section: Option<String>,
        key: String,
    },
    #[error("line {line}: `{key}` appears twice")]
    Duplicate { line: usize, key: String },
    #[error("`{key}`: cannot parse `{value}`")]
    Parse { key: String, value: String },
    #[error("`{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn section_suffix(section: &Option<String>) -> String {
    section
        .as_ref()
        .map(|s| format!(" in [{s}]"))
        .unwrap_or_default()
}

impl ConfigError {
    /// The offending key, when there is one.
    pub fn key(&self) -> Option<&str> {
        match self {
            ConfigError::UnknownKey { key, .. }
            | ConfigError::Duplicate { key, .. }
            | ConfigError::Parse { key, .. }
            | ConfigError::Invalid { key, .. } => Some(key),
            _ => None,
        }
    }

    fn invalid(key: &str, reason: impl fmt::Display) -> Self {
        ConfigError::Invalid {
            key: key.to_string(),
            reason: reason.to_string(),
        }
    }
}

/// How numeric runs end stages 1 and 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Switching {
    /// Midpoint crossing and separation return, detected on the trajectory.
    Events,
    /// Fixed durations from the closed-form protocol.
    Scheduled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MapPlane {
    Yz,
    Xy,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MapConfig {
    pub plane: MapPlane,
    /// Out-of-plane coordinate, m.
    pub coord: f64,
    /// In-plane grid centre, m.
    pub center: [f64; 2],
    pub half_extent: f64,
    pub resolution: usize,
    /// 0 for levitation wires only, otherwise the protocol stage (1-based).
    pub stage: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub two_a_min_um: f64,
    pub two_a_max_um: f64,
    pub two_a_points: usize,
    pub lev_currents: Vec<f64>,
    pub masses: Vec<f64>,
    pub x0_min_um: f64,
    pub x0_max_um: f64,
    pub x0_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimateConfig {
    pub current: f64,
    pub duration: f64,
}

/// Numerical controls.
#[derive(Debug, Clone, PartialEq)]
pub struct NumericConfig {
    pub dt: f64,
    pub quad_order: usize,
    /// `None` disables the convergence check.
    pub quad_check_order: Option<usize>,
    pub quad_rel_tol: f64,
    pub jacobian_step: f64,
    pub stage_horizon: f64,
    /// Row spacing of closed-form trajectory tables, s.
    pub sample_dt: f64,
    pub closure: ClosureSettings,
}

impl NumericConfig {
    pub fn quadrature(&self) -> RectQuadrature {
        RectQuadrature::new(self.quad_order, self.quad_check_order, self.quad_rel_tol)
    }

    pub fn settings(&self) -> NumericSettings {
        NumericSettings {
            dt: self.dt,
            stage_horizon: self.stage_horizon,
            equilibrium_bracket: EQUILIBRIUM_BRACKET,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub chip: ChipConfig,
    pub particle: Particle,
    /// Release distance; the particle starts at `x = -x0`, m.
    pub x0: f64,
    /// Stage 1 and 2 current, A.
    pub current: f64,
    /// Stage 3 current, A.
    pub closing_current: f64,
    pub switching: Switching,
    pub numeric: NumericConfig,
    pub map: MapConfig,
    pub sweep: SweepConfig,
    pub estimate: EstimateConfig,
    pub output_dir: PathBuf,
    pub constants: PhysicalConstants,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            chip: ChipConfig::default(),
            particle: Particle::default(),
            x0: 40e-6,
            current: 10.0,
            closing_current: 9.99,
            switching: Switching::Events,
            numeric: NumericConfig {
                dt: 1e-5,
                quad_order: 32,
                quad_check_order: Some(64),
                quad_rel_tol: 1e-6,
                jacobian_step: 1e-8,
                stage_horizon: 1.0,
                sample_dt: 1e-4,
                closure: ClosureSettings::default(),
            },
            map: MapConfig {
                plane: MapPlane::Yz,
                coord: 0.0,
                center: [0.0, 0.0],
                half_extent: 20e-6,
                resolution: 101,
                stage: 1,
            },
            sweep: SweepConfig {
                two_a_min_um: 10.0,
                two_a_max_um: 40.0,
                two_a_points: 61,
                lev_currents: vec![24.0, 18.0, 12.0],
                masses: vec![1e-19, 1e-17, 1e-15],
                x0_min_um: 1.0,
                x0_max_um: 100.0,
                x0_points: 100,
            },
            estimate: EstimateConfig {
                current: 24.0,
                duration: 0.1,
            },
            output_dir: PathBuf::from("out"),
            constants: PhysicalConstants::default(),
        }
    }
}

impl RunConfig {
    pub fn plan(&self) -> StagePlan {
        StagePlan::three_stage(self.current, self.closing_current)
    }
}

const SECTIONS: [&str; 7] = [
    "chip", "particle", "protocol", "numeric", "map", "sweep", "estimate",
];

fn num(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| ConfigError::Parse {
            key: key.to_string(),
            value: value.to_string(),
        })
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = num(key, value)?;
    if v > 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, "must be positive"))
    }
}

fn non_negative(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = num(key, value)?;
    if v >= 0.0 {
        Ok(v)
    } else {
        Err(ConfigError::invalid(key, "must not be negative"))
    }
}

fn count(key: &str, value: &str, min: usize) -> Result<usize, ConfigError> {
    let v = value.parse::<usize>().map_err(|_| ConfigError::Parse {
        key: key.to_string(),
        value: value.to_string(),
    })?;
    if v < min {
        return Err(ConfigError::invalid(key, format!("must be at least {min}")));
    }
    Ok(v)
}

fn list(key: &str, value: &str) -> Result<Vec<f64>, ConfigError> {
    let items: Vec<f64> = value
        .split(',')
        .map(|s| positive(key, s.trim()))
        .collect::<Result<_, _>>()?;
    if items.is_empty() {
        return Err(ConfigError::invalid(key, "needs at least one value"));
    }
    Ok(items)
}

/// Micrometres per metre.
const PER_M_UM: f64 = 1e6;

/// Parses configuration text. An empty input gives the defaults.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::default();
    let mut section: Option<String> = None;
    let mut seen: Vec<String> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ConfigError::UnknownSection {
                    line,
                    name: name.to_string(),
                });
            }
            section = Some(name.to_string());
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Syntax {
                line,
                text: content.to_string(),
            });
        };
        let (key, value) = (key.trim(), value.trim());
        let qualified = format!("{}.{key}", section.as_deref().unwrap_or(""));
        if seen.contains(&qualified) {
            return Err(ConfigError::Duplicate {
                line,
                key: key.to_string(),
            });
        }
        seen.push(qualified);
        apply(&mut cfg, section.as_deref(), key, value).map_err(|e| match e {
            ConfigError::UnknownKey { .. } => ConfigError::UnknownKey {
                line,
                section: section.clone(),
                key: key.to_string(),
            },
            other => other,
        })?;
    }
    validate(&cfg)?;
    Ok(cfg)
}

fn apply(
    cfg: &mut RunConfig,
    section: Option<&str>,
    key: &str,
    v: &str,
) -> Result<(), ConfigError> {
    let unknown = || ConfigError::UnknownKey {
        line: 0,
        section: section.map(str::to_string),
        key: key.to_string(),
    };
    match (section, key) {
        (None, "output_dir") => cfg.output_dir = PathBuf::from(v),
        (Some("chip"), "a_um") => cfg.chip.lev_half_spacing_y = positive(key, v)? / PER_M_UM,
        (Some("chip"), "b_um") => cfg.chip.lev_half_spacing_z = positive(key, v)? / PER_M_UM,
        (Some("chip"), "w_um") => cfg.chip.wire_width = positive(key, v)? / PER_M_UM,
        (Some("chip"), "L_um") => cfg.chip.sep_half_spacing = positive(key, v)? / PER_M_UM,
        (Some("chip"), "l_um") => cfg.chip.sep_wire_half_length = positive(key, v)? / PER_M_UM,
        (Some("chip"), "IL_A") => cfg.chip.lev_current = non_negative(key, v)?,
        (Some("chip"), "B0_T") => cfg.chip.bias_field = positive(key, v)?,
        (Some("particle"), "mass_kg") => {
            cfg.particle = Particle::new(num(key, v)?)
                .map_err(|_| ConfigError::invalid(key, "must be positive"))?
        }
        (Some("protocol"), "x0_um") => cfg.x0 = non_negative(key, v)? / PER_M_UM,
        (Some("protocol"), "I1_A") => cfg.current = positive(key, v)?,
        (Some("protocol"), "I3_A") => cfg.closing_current = positive(key, v)?,
        (Some("protocol"), "switching") => {
            cfg.switching = match v {
                "events" => Switching::Events,
                "scheduled" => Switching::Scheduled,
                _ => {
                    return Err(ConfigError::invalid(
                        key,
                        "expected `events` or `scheduled`",
                    ))
                }
            }
        }
        (Some("numeric"), "dt_s") => cfg.numeric.dt = positive(key, v)?,
        (Some("numeric"), "quad_order") => cfg.numeric.quad_order = count(key, v, 1)?,
        (Some("numeric"), "quad_check_order") => {
            let n = count(key, v, 0)?;
            cfg.numeric.quad_check_order = (n > 0).then_some(n);
        }
        (Some("numeric"), "quad_rel_tol") => cfg.numeric.quad_rel_tol = positive(key, v)?,
        (Some("numeric"), "jacobian_step_m") => cfg.numeric.jacobian_step = positive(key, v)?,
        (Some("numeric"), "stage_horizon_s") => cfg.numeric.stage_horizon = positive(key, v)?,
        (Some("numeric"), "sample_dt_s") => cfg.numeric.sample_dt = positive(key, v)?,
        (Some("numeric"), "tol_dx_m") => cfg.numeric.closure.tolerance_dx = positive(key, v)?,
        (Some("numeric"), "tol_dv_mps") => cfg.numeric.closure.tolerance_dv = positive(key, v)?,
        (Some("numeric"), "max_iter") => cfg.numeric.closure.max_iterations = count(key, v, 1)?,
        (Some("numeric"), "scan_lo") => cfg.numeric.closure.scan_range.0 = positive(key, v)?,
        (Some("numeric"), "scan_hi") => cfg.numeric.closure.scan_range.1 = positive(key, v)?,
        (Some("numeric"), "scan_points") => cfg.numeric.closure.scan_points = count(key, v, 2)?,
        (Some("numeric"), "horizon_factor") => {
            cfg.numeric.closure.horizon_factor = positive(key, v)?
        }
        (Some("map"), "plane") => {
            cfg.map.plane = match v {
                "yz" => MapPlane::Yz,
                "xy" => MapPlane::Xy,
                _ => return Err(ConfigError::invalid(key, "expected `yz` or `xy`")),
            }
        }
        (Some("map"), "coord_um") => cfg.map.coord = num(key, v)? / PER_M_UM,
        (Some("map"), "center_u_um") => cfg.map.center[0] = num(key, v)? / PER_M_UM,
        (Some("map"), "center_v_um") => cfg.map.center[1] = num(key, v)? / PER_M_UM,
        (Some("map"), "half_extent_um") => cfg.map.half_extent = positive(key, v)? / PER_M_UM,
        (Some("map"), "resolution") => cfg.map.resolution = count(key, v, 1)?,
        (Some("map"), "stage") => {
            let s = count(key, v, 0)?;
            if s > 3 {
                return Err(ConfigError::invalid(key, "must be 0, 1, 2 or 3"));
            }
            cfg.map.stage = s;
        }
        (Some("sweep"), "two_a_min_um") => cfg.sweep.two_a_min_um = positive(key, v)?,
        (Some("sweep"), "two_a_max_um") => cfg.sweep.two_a_max_um = positive(key, v)?,
        (Some("sweep"), "two_a_points") => cfg.sweep.two_a_points = count(key, v, 1)?,
        (Some("sweep"), "IL_list_A") => cfg.sweep.lev_currents = list(key, v)?,
        (Some("sweep"), "masses_kg") => cfg.sweep.masses = list(key, v)?,
        (Some("sweep"), "x0_min_um") => cfg.sweep.x0_min_um = positive(key, v)?,
        (Some("sweep"), "x0_max_um") => cfg.sweep.x0_max_um = positive(key, v)?,
        (Some("sweep"), "x0_points") => cfg.sweep.x0_points = count(key, v, 1)?,
        (Some("estimate"), "current_A") => cfg.estimate.current = non_negative(key, v)?,
        (Some("estimate"), "duration_s") => cfg.estimate.duration = positive(key, v)?,
        _ => return Err(unknown()),
    }
    Ok(())
}

/// Cross-key invariants.
fn validate(cfg: &RunConfig) -> Result<(), ConfigError> {
    cfg.chip.validate().map_err(|e| match e {
        ModelError::Overlap { axis: "y", .. } => {
            ConfigError::invalid("a_um", format!("{e}: need 2a > w"))
        }
        ModelError::Overlap { .. } => ConfigError::invalid("b_um", format!("{e}: need 2b > w")),
        ModelError::SeparationIntersectsLevitation(_) => ConfigError::invalid("L_um", e),
        other => ConfigError::invalid("chip", other),
    })?;
    let (lo, hi) = cfg.numeric.closure.scan_range;
    if lo >= hi {
        return Err(ConfigError::invalid("scan_hi", "must exceed scan_lo"));
    }
    if cfg.sweep.two_a_min_um > cfg.sweep.two_a_max_um {
        return Err(ConfigError::invalid(
            "two_a_max_um",
            "must not be below two_a_min_um",
        ));
    }
    if cfg.sweep.x0_min_um > cfg.sweep.x0_max_um {
        return Err(ConfigError::invalid(
            "x0_max_um",
            "must not be below x0_min_um",
        ));
    }
    if let Some(check) = cfg.numeric.quad_check_order {
        if check <= cfg.numeric.quad_order {
            return Err(ConfigError::invalid(
                "quad_check_order",
                "must exceed quad_order (or be 0 to disable the check)",
            ));
        }
    }
    Ok(())
}
