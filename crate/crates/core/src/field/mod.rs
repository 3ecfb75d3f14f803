//! Magnetostatics of the chip: single-wire kernels, assembled field models,
//! Jacobians, closed-form gradient estimates and grid maps.

mod gradients;
mod kernels;
mod map;
mod source;

pub use gradients::{eta_l_thin, eta_s_thin};
pub use kernels::{
    field_rect_wire, field_thin_finite_wire, field_thin_infinite, wire_field, RectQuadrature,
};
pub use map::{field_map, FieldSample, GridSpec, Plane};
pub use source::{
    central_jacobian, field_jacobian, total_field, ChipField, FieldSource, LinearField,
    DEFAULT_JACOBIAN_STEP, RICHARDSON_REL_TOL,
};

use crate::math::Vec3;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FieldError {
    #[error("point ({:e}, {:e}, {:e}) lies inside a conductor", .0[0], .0[1], .0[2])]
    InsideConductor(Vec3),
    #[error("point ({:e}, {:e}, {:e}) lies on a filament axis", .0[0], .0[1], .0[2])]
    OnAxis(Vec3),
    #[error("cross-section quadrature not converged: relative change {0:e}")]
    QuadratureNotConverged(f64),
    #[error("Jacobian unstable under step halving: relative change {0:e}")]
    JacobianUnstable(f64),
    #[error("kernel called with the wrong conductor model")]
    WrongConductor,
}
