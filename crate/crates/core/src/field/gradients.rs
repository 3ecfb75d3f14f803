use crate::math::PI;

/// Levitation gradient `∂B_z/∂z` at the centre of four infinitely thin wires
/// at `(±a, ±b)` carrying `±I_L`: `(4 μ0 I_L / π) · a b / (a² + b²)²`.
pub fn eta_l_thin(a: f64, b: f64, lev_current: f64, mu0: f64) -> f64 {
    let r2 = a * a + b * b;
    4.0 * mu0 * lev_current / PI * a * b / (r2 * r2)
}

/// Magnitude of `∂B_x/∂x` at the centre of four infinite z-wires at `(±L, ±L)`:
/// `μ0 I / (π L²)`.
pub fn eta_s_thin(half_spacing: f64, current: f64, mu0: f64) -> f64 {
    mu0 * current / (PI * half_spacing * half_spacing)
}
