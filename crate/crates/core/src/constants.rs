//! Physical and material constants.

#[cfg_attr(feature = "std", allow(unused_imports))]
use crate::math::Float;

/// Every numeric constant the model uses. `gamma_e` and `chi_rho` keep the
/// sign they carry physically (both negative).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Vacuum permeability, T·m/A.
    pub mu0: f64,
    /// Reduced Planck constant, J·s.
    pub hbar: f64,
    /// Electron gyromagnetic ratio, rad/(s·T). Negative.
    pub gamma_e: f64,
    /// Mass magnetic susceptibility of diamond, m³/kg. Negative.
    pub chi_rho: f64,
    /// Gravitational acceleration, m/s².
    pub g: f64,
    /// NV zero-field splitting, Hz. Carried for completeness; it adds no force.
    pub zero_field_splitting: f64,
    /// Electrical resistivity of gold, Ω·m.
    pub rho_gold: f64,
    /// Thermal diffusivity of crystalline silicon at room temperature, m²/s.
    pub alpha_si: f64,
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self {
            mu0: 1.2566e-6,
            hbar: 1.05e-34,
            gamma_e: -1.8e11,
            chi_rho: -6.2e-9,
            g: 9.8,
            zero_field_splitting: 2.8e9,
            rho_gold: 2.44e-8,
            alpha_si: 8.0e-5,
        }
    }
}

impl PhysicalConstants {
    /// `sqrt(-chi_rho / mu0)`: multiply a field gradient by this to get a
    /// diamagnetic trap angular frequency.
    pub fn diamagnetic_rate(&self) -> f64 {
        (-self.chi_rho / self.mu0).sqrt()
    }

    /// `g * mu0 / chi_rho` (T²/m), the product `B_z(z_L) * eta_L` at the
    /// levitation height.
    pub fn residual_bz_product(&self) -> f64 {
        self.g * self.mu0 / self.chi_rho
    }

    /// True when the sign conventions the formulas rely on hold.
    pub fn is_physical(&self) -> bool {
        self.chi_rho < 0.0
            && self.gamma_e < 0.0
            && self.mu0 > 0.0
            && self.hbar > 0.0
            && self.g >= 0.0
    }
}
