//! Vector aliases and float helpers shared by every module.

pub use nalgebra::{Matrix3, Vector3};
pub use num_traits::Float;

pub type Vec3 = Vector3<f64>;
pub type Mat3 = Matrix3<f64>;

pub const PI: f64 = core::f64::consts::PI;

/// `|a - b| <= rel * max(|a|, |b|)`, with exact equality accepted.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

/// Largest absolute entry of a 3x3 matrix.
pub fn max_abs(m: &Mat3) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}
