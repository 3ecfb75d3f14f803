//! Device description: particle, chip geometry, wire assemblies and the
//! stage plan of the interferometer protocol.

use alloc::vec;
use alloc::vec::Vec;

use crate::constants::PhysicalConstants;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("`{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("`{0}` must be finite")]
    NonFinite(&'static str),
    #[error("wires overlap along {axis}: spacing {spacing:e} m <= wire width {width:e} m")]
    Overlap {
        axis: &'static str,
        spacing: f64,
        width: f64,
    },
    #[error("separation wires at half-spacing {0:e} m cut through the levitation assembly")]
    SeparationIntersectsLevitation(f64),
    #[error("stage plan is empty")]
    EmptyPlan,
}

/// Classical label of the NV spin branch. The spin is frozen along x, so a
/// branch is just the sign of the Zeeman coupling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SpinBranch {
    Up,
    Down,
    /// Virtual spinless midpoint of the two arms.
    Neutral,
}

impl SpinBranch {
    /// The `S_x` value entering `ħ γ_e S_x B_x`.
    ///
    /// `Up` is defined as the arm pushed further along +x in stage 1 (larger
    /// equilibrium offset `k`). With the signed constants (`γ_e < 0`,
    /// `χ_ρ < 0`) that is `S_x = -1`.
    pub fn zeeman_projection(self, c: &PhysicalConstants) -> f64 {
        let up = if c.gamma_e * c.chi_rho > 0.0 {
            -1.0
        } else {
            1.0
        };
        match self {
            SpinBranch::Up => up,
            SpinBranch::Down => -up,
            SpinBranch::Neutral => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Particle {
    /// kg
    pub mass: f64,
}

impl Particle {
    pub fn new(mass: f64) -> Result<Self, ModelError> {
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(ModelError::NonPositive("mass"));
        }
        Ok(Self { mass })
    }
}

impl Default for Particle {
    fn default() -> Self {
        Self { mass: 1e-19 }
    }
}

/// Geometry and drive of the chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChipConfig {
    /// Half-spacing `a` of the levitation wires along y (m).
    pub lev_half_spacing_y: f64,
    /// Half-spacing `b` of the levitation wires along z (m).
    pub lev_half_spacing_z: f64,
    /// Width = thickness `w` of every wire (m).
    pub wire_width: f64,
    /// Half-spacing `L` of the separation wires in the x-y plane (m).
    pub sep_half_spacing: f64,
    /// Half-length `l` of each separation wire along z (m).
    pub sep_wire_half_length: f64,
    /// Levitation current magnitude `I_L` (A).
    pub lev_current: f64,
    /// Uniform bias field along +x (T).
    pub bias_field: f64,
}

impl Default for ChipConfig {
    fn default() -> Self {
        Self {
            lev_half_spacing_y: 9e-6,
            lev_half_spacing_z: 7e-6,
            wire_width: 10e-6,
            sep_half_spacing: 200e-6,
            sep_wire_half_length: 200e-6,
            lev_current: 24.0,
            bias_field: 0.5,
        }
    }
}

impl ChipConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            (self.lev_half_spacing_y, "lev_half_spacing_y"),
            (self.lev_half_spacing_z, "lev_half_spacing_z"),
            (self.wire_width, "wire_width"),
            (self.sep_half_spacing, "sep_half_spacing"),
            (self.sep_wire_half_length, "sep_wire_half_length"),
        ];
        for (v, name) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ModelError::NonPositive(name));
            }
        }
        if !self.lev_current.is_finite() {
            return Err(ModelError::NonFinite("lev_current"));
        }
        if !self.bias_field.is_finite() {
            return Err(ModelError::NonFinite("bias_field"));
        }
        let w = self.wire_width;
        if 2.0 * self.lev_half_spacing_y <= w {
            return Err(ModelError::Overlap {
                axis: "y",
                spacing: 2.0 * self.lev_half_spacing_y,
                width: w,
            });
        }
        if 2.0 * self.lev_half_spacing_z <= w {
            return Err(ModelError::Overlap {
                axis: "z",
                spacing: 2.0 * self.lev_half_spacing_z,
                width: w,
            });
        }
        if self.sep_half_spacing <= self.lev_half_spacing_y + 0.5 * w {
            return Err(ModelError::SeparationIntersectsLevitation(
                self.sep_half_spacing,
            ));
        }
        Ok(())
    }
}

/// Axis a straight conductor runs along.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WireAxis {
    X,
    Z,
}

/// Conductor model of a wire segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Conductor {
    /// Square cross-section of side `2 * half_width`, axis along x, infinite in x.
    RectX { half_width: f64 },
    /// Filament along z from `-half_length` to `+half_length`.
    ThinFiniteZ { half_length: f64 },
    /// Infinite filament.
    ThinInfinite { axis: WireAxis },
}

/// One straight conductor.
///
/// `center` lives in the plane transverse to the wire: `(y, z)` for x-parallel
/// wires, `(x, y)` for z-parallel ones. Positive `current` flows toward +x or
/// +z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireSegment {
    pub conductor: Conductor,
    pub center: [f64; 2],
    pub current: f64,
}

impl WireSegment {
    pub fn axis(&self) -> WireAxis {
        match self.conductor {
            Conductor::RectX { .. } => WireAxis::X,
            Conductor::ThinFiniteZ { .. } => WireAxis::Z,
            Conductor::ThinInfinite { axis } => axis,
        }
    }
}

/// Sign of the separation gradient `eta_S` during a stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientSign {
    Negative,
    Positive,
}

impl GradientSign {
    pub fn value(self) -> f64 {
        match self {
            GradientSign::Negative => -1.0,
            GradientSign::Positive => 1.0,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            GradientSign::Negative => GradientSign::Positive,
            GradientSign::Positive => GradientSign::Negative,
        }
    }
}

/// How a stage ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EndRule {
    /// Fixed duration (s) after the stage starts.
    Scheduled(f64),
    /// The spinless midpoint of the two arms reaches x = 0.
    MidpointCrossesZero,
    /// The arm separation comes back to its value at the start of the stage.
    SeparationReturnsToInitial,
    /// The arms recombine: the separation reaches its turning point.
    Closure,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StageSpec {
    pub eta_sign: GradientSign,
    /// Current magnitude in each separation wire (A).
    pub separation_current: f64,
    pub end_rule: EndRule,
}

impl StageSpec {
    /// Signed separation current that multiplies the wire table: the table
    /// with positive current produces `eta_S < 0`.
    pub fn table_current(&self) -> f64 {
        -self.eta_sign.value() * self.separation_current
    }
}

/// Ordered list of protocol stages.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePlan {
    pub stages: Vec<StageSpec>,
}

impl StagePlan {
    /// Split, reverse, recombine: `-eta1`, `+eta1`, `-eta2`.
    pub fn three_stage(current: f64, closing_current: f64) -> Self {
        Self {
            stages: vec![
                StageSpec {
                    eta_sign: GradientSign::Negative,
                    separation_current: current,
                    end_rule: EndRule::MidpointCrossesZero,
                },
                StageSpec {
                    eta_sign: GradientSign::Positive,
                    separation_current: current,
                    end_rule: EndRule::SeparationReturnsToInitial,
                },
                StageSpec {
                    eta_sign: GradientSign::Negative,
                    separation_current: closing_current,
                    end_rule: EndRule::Closure,
                },
            ],
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.stages.is_empty() {
            return Err(ModelError::EmptyPlan);
        }
        for s in &self.stages {
            if !s.separation_current.is_finite() {
                return Err(ModelError::NonFinite("separation_current"));
            }
            if let EndRule::Scheduled(d) = s.end_rule {
                if !(d > 0.0 && d.is_finite()) {
                    return Err(ModelError::NonPositive("duration"));
                }
            }
        }
        Ok(())
    }

    /// Copy of the plan with the closing stage's current replaced.
    pub fn with_closing_current(&self, current: f64) -> Self {
        let mut plan = self.clone();
        if let Some(last) = plan.stages.last_mut() {
            last.separation_current = current;
        }
        plan
    }
}

impl Default for StagePlan {
    fn default() -> Self {
        Self::three_stage(10.0, 9.99)
    }
}

/// The four x-parallel rectangular levitation wires at `(±a, ±b)`.
pub fn build_levitation_assembly(config: &ChipConfig) -> Result<Vec<WireSegment>, ModelError> {
    config.validate()?;
    let conductor = Conductor::RectX {
        half_width: 0.5 * config.wire_width,
    };
    Ok(levitation_layout(config)
        .into_iter()
        .map(|(center, current)| WireSegment {
            conductor,
            center,
            current,
        })
        .collect())
}

/// Same layout as [`build_levitation_assembly`] with infinitely thin wires.
pub fn thin_levitation_assembly(config: &ChipConfig) -> Vec<WireSegment> {
    levitation_layout(config)
        .into_iter()
        .map(|(center, current)| WireSegment {
            conductor: Conductor::ThinInfinite { axis: WireAxis::X },
            center,
            current,
        })
        .collect()
}

fn levitation_layout(config: &ChipConfig) -> [([f64; 2], f64); 4] {
    let (a, b, i) = (
        config.lev_half_spacing_y,
        config.lev_half_spacing_z,
        config.lev_current,
    );
    [([a, b], -i), ([-a, b], i), ([-a, -b], -i), ([a, -b], i)]
}

/// The four z-parallel finite separation wires at `(±L, ±L)` driven as the
/// stage requires. Reversing `eta_sign` reverses every current.
pub fn build_separation_assembly(
    config: &ChipConfig,
    stage: &StageSpec,
) -> Result<Vec<WireSegment>, ModelError> {
    config.validate()?;
    let conductor = Conductor::ThinFiniteZ {
        half_length: config.sep_wire_half_length,
    };
    Ok(
        separation_layout(config.sep_half_spacing, stage.table_current())
            .into_iter()
            .map(|(center, current)| WireSegment {
                conductor,
                center,
                current,
            })
            .collect(),
    )
}

/// Infinite-filament version of the separation assembly.
pub fn infinite_separation_assembly(config: &ChipConfig, stage: &StageSpec) -> Vec<WireSegment> {
    separation_layout(config.sep_half_spacing, stage.table_current())
        .into_iter()
        .map(|(center, current)| WireSegment {
            conductor: Conductor::ThinInfinite { axis: WireAxis::Z },
            center,
            current,
        })
        .collect()
}

fn separation_layout(l: f64, i: f64) -> [([f64; 2], f64); 4] {
    [([l, l], -i), ([-l, l], i), ([-l, -l], -i), ([l, -l], i)]
}
