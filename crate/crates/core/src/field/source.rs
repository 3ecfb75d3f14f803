use alloc::vec::Vec;

use crate::constants::PhysicalConstants;
use crate::math::{max_abs, Mat3, Vec3};
use crate::model::{
    build_levitation_assembly, build_separation_assembly, ChipConfig, ModelError, StageSpec,
    WireAxis, WireSegment,
};

use super::kernels::{wire_field, RectQuadrature};
use super::FieldError;

/// Central-difference step (m).
pub const DEFAULT_JACOBIAN_STEP: f64 = 1e-8;
/// Largest accepted change of any Jacobian entry, relative to the largest
/// entry, when the step is halved.
pub const RICHARDSON_REL_TOL: f64 = 1e-3;

/// Anything that produces a static magnetic field.
pub trait FieldSource {
    fn field(&self, point: &Vec3) -> Result<Vec3, FieldError>;

    /// `J[i][j] = ∂B_i/∂x_j` by central differences with the given step.
    fn jacobian(&self, point: &Vec3, step: f64) -> Result<Mat3, FieldError> {
        central_jacobian(|p| self.field(p), point, step, [true; 3])
    }
}

impl<T: FieldSource + ?Sized> FieldSource for &T {
    fn field(&self, point: &Vec3) -> Result<Vec3, FieldError> {
        (**self).field(point)
    }

    fn jacobian(&self, point: &Vec3, step: f64) -> Result<Mat3, FieldError> {
        (**self).jacobian(point, step)
    }
}

/// Central differences of `f` around `point`. Columns for axes whose flag is
/// false are left at zero.
pub fn central_jacobian<F>(
    mut f: F,
    point: &Vec3,
    step: f64,
    axes: [bool; 3],
) -> Result<Mat3, FieldError>
where
    F: FnMut(&Vec3) -> Result<Vec3, FieldError>,
{
    let mut jac = Mat3::zeros();
    for (j, active) in axes.iter().enumerate() {
        if !active {
            continue;
        }
        let mut fwd = *point;
        let mut bwd = *point;
        fwd[j] += step;
        bwd[j] -= step;
        let col = (f(&fwd)? - f(&bwd)?) / (2.0 * step);
        jac.set_column(j, &col);
    }
    Ok(jac)
}

/// Jacobian at `step`, accepted only if halving the step moves no entry by
/// more than [`RICHARDSON_REL_TOL`] of the largest entry.
pub fn field_jacobian<S: FieldSource + ?Sized>(
    source: &S,
    point: &Vec3,
    step: f64,
) -> Result<Mat3, FieldError> {
    let coarse = source.jacobian(point, step)?;
    let fine = source.jacobian(point, 0.5 * step)?;
    let scale = max_abs(&fine);
    let change = max_abs(&(coarse - fine));
    if change > RICHARDSON_REL_TOL * scale {
        let rel = if scale > 0.0 {
            change / scale
        } else {
            f64::INFINITY
        };
        return Err(FieldError::JacobianUnstable(rel));
    }
    Ok(coarse)
}

/// Total field of the chip: levitation wires, separation wires and the
/// uniform bias along +x.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipField {
    pub levitation: Vec<WireSegment>,
    pub separation: Vec<WireSegment>,
    /// T, along +x.
    pub bias: f64,
    mu0: f64,
    quadrature: RectQuadrature,
}

impl ChipField {
    pub fn new(
        levitation: Vec<WireSegment>,
        separation: Vec<WireSegment>,
        bias: f64,
        mu0: f64,
    ) -> Self {
        Self {
            levitation,
            separation,
            bias,
            mu0,
            quadrature: RectQuadrature::default(),
        }
    }

    /// Rect-wire levitation assembly plus the separation assembly driven as
    /// `stage` prescribes.
    pub fn for_stage(
        config: &ChipConfig,
        stage: &StageSpec,
        constants: &PhysicalConstants,
    ) -> Result<Self, ModelError> {
        Ok(Self::new(
            build_levitation_assembly(config)?,
            build_separation_assembly(config, stage)?,
            config.bias_field,
            constants.mu0,
        ))
    }

    /// Levitation wires and bias, separation wires off.
    pub fn levitation_only(
        config: &ChipConfig,
        constants: &PhysicalConstants,
    ) -> Result<Self, ModelError> {
        Ok(Self::new(
            build_levitation_assembly(config)?,
            Vec::new(),
            config.bias_field,
            constants.mu0,
        ))
    }

    pub fn with_quadrature(mut self, quadrature: RectQuadrature) -> Self {
        self.quadrature = quadrature;
        self
    }

    /// Copy whose rect-wire quadrature skips the convergence check.
    pub fn unchecked(&self) -> Self {
        let mut out = self.clone();
        out.quadrature = self.quadrature.unchecked();
        out
    }

    /// Copy with the separation assembly replaced.
    pub fn with_separation(&self, separation: Vec<WireSegment>) -> Self {
        let mut out = self.clone();
        out.separation = separation;
        out
    }

    pub fn quadrature(&self) -> &RectQuadrature {
        &self.quadrature
    }

    pub fn mu0(&self) -> f64 {
        self.mu0
    }

    pub fn levitation_field(&self, point: &Vec3) -> Result<Vec3, FieldError> {
        self.sum(&self.levitation, point)
    }

    pub fn separation_field(&self, point: &Vec3) -> Result<Vec3, FieldError> {
        self.sum(&self.separation, point)
    }

    fn sum(&self, wires: &[WireSegment], point: &Vec3) -> Result<Vec3, FieldError> {
        let mut b = Vec3::zeros();
        for w in wires {
            b += wire_field(point, w, &self.quadrature, self.mu0)?;
        }
        Ok(b)
    }

    fn x_invariant(wires: &[WireSegment]) -> bool {
        wires.iter().all(|w| w.axis() == WireAxis::X)
    }
}

impl FieldSource for ChipField {
    fn field(&self, point: &Vec3) -> Result<Vec3, FieldError> {
        let mut b = self.levitation_field(point)? + self.separation_field(point)?;
        b[0] += self.bias;
        Ok(b)
    }

    fn jacobian(&self, point: &Vec3, step: f64) -> Result<Mat3, FieldError> {
        // x-parallel wires are infinite in x, so their x column is exactly zero.
        let lev_axes = if Self::x_invariant(&self.levitation) {
            [false, true, true]
        } else {
            [true; 3]
        };
        let lev = central_jacobian(|p| self.levitation_field(p), point, step, lev_axes)?;
        let sep = central_jacobian(|p| self.separation_field(p), point, step, [true; 3])?;
        Ok(lev + sep)
    }
}

/// `B` of the chip at `point`; see [`ChipField`].
pub fn total_field<S: FieldSource + ?Sized>(point: &Vec3, model: &S) -> Result<Vec3, FieldError> {
    model.field(point)
}

/// Ideal field the closed-form protocol assumes:
/// `B = (η_S x + B0, -(η_L + η_S) y, η_L z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearField {
    pub eta_l: f64,
    pub eta_s: f64,
    pub bias: f64,
}

impl LinearField {
    pub fn new(eta_l: f64, eta_s: f64, bias: f64) -> Self {
        Self { eta_l, eta_s, bias }
    }

    /// No gradient at all.
    pub fn uniform(bias: f64) -> Self {
        Self::new(0.0, 0.0, bias)
    }
}

impl FieldSource for LinearField {
    fn field(&self, p: &Vec3) -> Result<Vec3, FieldError> {
        Ok(Vec3::new(
            self.eta_s * p[0] + self.bias,
            -(self.eta_l + self.eta_s) * p[1],
            self.eta_l * p[2],
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{eta_l_thin, eta_s_thin};
    use crate::model::{infinite_separation_assembly, thin_levitation_assembly, StagePlan};

    fn consts() -> PhysicalConstants {
        PhysicalConstants::default()
    }

    fn stage1() -> StageSpec {
        StagePlan::default().stages[0]
    }

    #[test]
    fn zero_currents_zero_bias_is_zero() {
        let mut cfg = ChipConfig::default();
        cfg.lev_current = 0.0;
        cfg.bias_field = 0.0;
        let mut st = stage1();
        st.separation_current = 0.0;
        let f = ChipField::for_stage(&cfg, &st, &consts()).unwrap();
        for p in [Vec3::new(1e-3, 2e-5, -3e-5), Vec3::new(0.0, 0.0, 0.0)] {
            assert_eq!(f.field(&p).unwrap(), Vec3::zeros());
        }
    }

    #[test]
    fn bias_only_is_uniform() {
        let mut cfg = ChipConfig::default();
        cfg.lev_current = 0.0;
        let mut st = stage1();
        st.separation_current = 0.0;
        let f = ChipField::for_stage(&cfg, &st, &consts()).unwrap();
        let b = f.field(&Vec3::new(3e-5, -1e-6, 2e-6)).unwrap();
        assert_eq!(b, Vec3::new(0.5, 0.0, 0.0));
    }

    #[test]
    fn default_chip_centre_is_bias() {
        let f = ChipField::for_stage(&ChipConfig::default(), &stage1(), &consts()).unwrap();
        let b = f.field(&Vec3::zeros()).unwrap();
        assert!((b[0] - 0.5).abs() < 1e-15);
        assert!(b[1].abs() < 1e-15 && b[2].abs() < 1e-15, "{b:?}");
    }

    #[test]
    fn uniform_field_has_zero_jacobian() {
        let j = field_jacobian(
            &LinearField::uniform(0.5),
            &Vec3::new(1e-5, 2e-6, -1e-7),
            1e-8,
        )
        .unwrap();
        assert_eq!(j, Mat3::zeros());
    }

    #[test]
    fn thin_levitation_jacobian_matches_closed_form() {
        let cfg = ChipConfig::default();
        let f = ChipField::new(
            thin_levitation_assembly(&cfg),
            Vec::new(),
            0.5,
            consts().mu0,
        );
        let j = field_jacobian(&f, &Vec3::zeros(), DEFAULT_JACOBIAN_STEP).unwrap();
        let eta = eta_l_thin(9e-6, 7e-6, 24.0, consts().mu0);
        assert!(((j[(2, 2)] - eta) / eta).abs() < 1e-6, "{}", j[(2, 2)]);
        assert!(((j[(1, 1)] + eta) / eta).abs() < 1e-6);
        assert!(j[(1, 2)].abs() < 1e-6 * eta && j[(2, 1)].abs() < 1e-6 * eta);
    }

    #[test]
    fn infinite_separation_jacobian_matches_closed_form() {
        let cfg = ChipConfig::default();
        let f = ChipField::new(
            Vec::new(),
            infinite_separation_assembly(&cfg, &stage1()),
            0.5,
            consts().mu0,
        );
        let j = field_jacobian(&f, &Vec3::zeros(), DEFAULT_JACOBIAN_STEP).unwrap();
        let eta = eta_s_thin(200e-6, 10.0, consts().mu0);
        assert!(((j[(0, 0)] + eta) / eta).abs() < 1e-6, "{}", j[(0, 0)]);
        assert!(((j[(1, 1)] - eta) / eta).abs() < 1e-6);
    }

    #[test]
    fn skipped_x_stencil_equals_full_stencil() {
        let f = ChipField::for_stage(&ChipConfig::default(), &stage1(), &consts())
            .unwrap()
            .unchecked();
        let p = Vec3::new(2e-5, 3e-7, -1e-7);
        let fast = f.jacobian(&p, 1e-8).unwrap();
        let full = central_jacobian(|q| f.field(q), &p, 1e-8, [true; 3]).unwrap();
        assert!(max_abs(&(fast - full)) <= 1e-9 * max_abs(&full));
    }

    #[test]
    fn stencil_inside_conductor_is_an_error() {
        let f = ChipField::levitation_only(&ChipConfig::default(), &consts()).unwrap();
        let p = Vec3::new(0.0, 4e-6 - 5e-9, 7e-6);
        assert!(matches!(
            f.jacobian(&p, 1e-8),
            Err(FieldError::InsideConductor(_))
        ));
    }

    #[test]
    fn linear_field_is_divergence_free() {
        let f = LinearField::new(1.4e5, -100.0, 0.5);
        let j = field_jacobian(&f, &Vec3::new(1e-5, 1e-7, -1e-7), 1e-8).unwrap();
        assert!(j.trace().abs() < 1e-6 * max_abs(&j));
    }
}
