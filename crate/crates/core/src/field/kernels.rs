#[cfg_attr(feature = "std", allow(unused_imports))]
use crate::math::{Float, Vec3, PI};
use crate::model::{Conductor, WireAxis, WireSegment};
use crate::quadrature::GaussLegendre;

use super::FieldError;

/// Tensor-product Gauss-Legendre rule over a square cross-section, with an
/// optional higher-order rule used to confirm convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct RectQuadrature {
    rule: GaussLegendre,
    check: Option<GaussLegendre>,
    rel_tol: f64,
}

impl Default for RectQuadrature {
    /// 32x32 nodes, accepted when 64x64 agrees to 1e-6.
    fn default() -> Self {
        Self::new(32, Some(64), 1e-6)
    }
}

impl RectQuadrature {
    pub fn new(order: usize, check_order: Option<usize>, rel_tol: f64) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            check: check_order.map(GaussLegendre::new),
            rel_tol,
        }
    }

    pub fn order(&self) -> usize {
        self.rule.len()
    }

    pub fn check_order(&self) -> Option<usize> {
        self.check.as_ref().map(GaussLegendre::len)
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// Same rule without the convergence check.
    pub fn unchecked(&self) -> Self {
        Self {
            rule: self.rule.clone(),
            check: None,
            rel_tol: self.rel_tol,
        }
    }

    pub fn is_checked(&self) -> bool {
        self.check.is_some()
    }
}

/// `(B_y, B_z)` of an x-parallel wire with a uniformly filled square
/// cross-section, infinitely long in x.
///
/// Integrates the filament kernels
/// `-mu0 J/(2π) (z - z_s)/r²` and `mu0 J/(2π) (y - y_s)/r²` with `J = I/w²`.
pub fn field_rect_wire(
    point: &Vec3,
    wire: &WireSegment,
    quad: &RectQuadrature,
    mu0: f64,
) -> Result<[f64; 2], FieldError> {
    let Conductor::RectX { half_width } = wire.conductor else {
        return Err(FieldError::WrongConductor);
    };
    let dy = point[1] - wire.center[0];
    let dz = point[2] - wire.center[1];
    if dy.abs() <= half_width && dz.abs() <= half_width {
        return Err(FieldError::InsideConductor(*point));
    }
    let b = rect_sum(&quad.rule, dy, dz, half_width, wire.current, mu0);
    if let Some(check) = &quad.check {
        let fine = rect_sum(check, dy, dz, half_width, wire.current, mu0);
        let diff = (b[0] - fine[0]).hypot(b[1] - fine[1]);
        let mag = fine[0].hypot(fine[1]);
        if diff > quad.rel_tol * mag {
            return Err(FieldError::QuadratureNotConverged(diff / mag));
        }
    }
    Ok(b)
}

/// Quadrature sum with `(dy, dz)` the field point relative to the wire centre.
fn rect_sum(rule: &GaussLegendre, dy: f64, dz: f64, h: f64, current: f64, mu0: f64) -> [f64; 2] {
    let nodes = rule.nodes();
    let weights = rule.weights();
    let mut sy = 0.0;
    let mut sz = 0.0;
    for (zj, wj) in nodes.iter().zip(weights) {
        let vz = dz - h * zj;
        let vz2 = vz * vz;
        let mut ry = 0.0;
        let mut rz = 0.0;
        for (yi, wi) in nodes.iter().zip(weights) {
            let vy = dy - h * yi;
            let inv = wi / (vy * vy + vz2);
            ry += vz * inv;
            rz += vy * inv;
        }
        sy += wj * ry;
        sz += wj * rz;
    }
    // J h² / (2π) with J = I / (2h)²
    let pre = mu0 * current / (8.0 * PI);
    [-pre * sy, pre * sz]
}

/// `(B_x, B_y)` of a z-parallel filament spanning `z ∈ [-l, l]`.
pub fn field_thin_finite_wire(
    point: &Vec3,
    wire: &WireSegment,
    mu0: f64,
) -> Result<[f64; 2], FieldError> {
    let Conductor::ThinFiniteZ { half_length } = wire.conductor else {
        return Err(FieldError::WrongConductor);
    };
    let dx = point[0] - wire.center[0];
    let dy = point[1] - wire.center[1];
    let r2 = dx * dx + dy * dy;
    if r2 <= f64::MIN_POSITIVE {
        return Err(FieldError::OnAxis(*point));
    }
    let z = point[2];
    let end = |zs: f64| (z + zs) / ((z + zs) * (z + zs) + r2).sqrt();
    let bracket = end(half_length) - end(-half_length);
    let pre = mu0 * wire.current / (4.0 * PI) * bracket / r2;
    Ok([-pre * dy, pre * dx])
}

/// Field of an infinite filament: `(B_y, B_z)` for an x-parallel wire,
/// `(B_x, B_y)` for a z-parallel wire.
pub fn field_thin_infinite(
    point: &Vec3,
    wire: &WireSegment,
    mu0: f64,
) -> Result<[f64; 2], FieldError> {
    let Conductor::ThinInfinite { axis } = wire.conductor else {
        return Err(FieldError::WrongConductor);
    };
    let (u, v) = match axis {
        WireAxis::X => (point[1], point[2]),
        WireAxis::Z => (point[0], point[1]),
    };
    let du = u - wire.center[0];
    let dv = v - wire.center[1];
    let r2 = du * du + dv * dv;
    if r2 <= f64::MIN_POSITIVE {
        return Err(FieldError::OnAxis(*point));
    }
    let pre = mu0 * wire.current / (2.0 * PI * r2);
    Ok([-pre * dv, pre * du])
}

/// Any wire's contribution as a 3-vector.
pub fn wire_field(
    point: &Vec3,
    wire: &WireSegment,
    quad: &RectQuadrature,
    mu0: f64,
) -> Result<Vec3, FieldError> {
    Ok(match wire.conductor {
        Conductor::RectX { .. } => {
            let [by, bz] = field_rect_wire(point, wire, quad, mu0)?;
            Vec3::new(0.0, by, bz)
        }
        Conductor::ThinFiniteZ { .. } => {
            let [bx, by] = field_thin_finite_wire(point, wire, mu0)?;
            Vec3::new(bx, by, 0.0)
        }
        Conductor::ThinInfinite { axis } => {
            let [b1, b2] = field_thin_infinite(point, wire, mu0)?;
            match axis {
                WireAxis::X => Vec3::new(0.0, b1, b2),
                WireAxis::Z => Vec3::new(b1, b2, 0.0),
            }
        }
    })
}
