//! Row generators for the parameter sweeps. Each row is an independent pure
//! function of its inputs, so callers may evaluate them in any order.

use alloc::vec::Vec;

use crate::analytic::delta_x_max;
use crate::constants::PhysicalConstants;
use crate::field::eta_l_thin;

/// `n` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GradientRow {
    pub two_a_um: f64,
    pub il_a: f64,
    pub eta_l_tpm: f64,
}

pub fn gradient_row(b: f64, two_a_um: f64, il_a: f64, c: &PhysicalConstants) -> GradientRow {
    GradientRow {
        two_a_um,
        il_a,
        eta_l_tpm: eta_l_thin(0.5 * two_a_um * 1e-6, b, il_a, c.mu0),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BzRow {
    pub two_a_um: f64,
    pub il_a: f64,
    pub bz_t: f64,
}

/// `B_z(z_L) = g μ0 / (χ_ρ η_L)` with the thin-wire `η_L`.
pub fn bz_row(b: f64, two_a_um: f64, il_a: f64, c: &PhysicalConstants) -> BzRow {
    let eta = eta_l_thin(0.5 * two_a_um * 1e-6, b, il_a, c.mu0);
    BzRow {
        two_a_um,
        il_a,
        bz_t: c.residual_bz_product() / eta,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeRow {
    pub mass_kg: f64,
    pub x0_um: f64,
    pub dxmax_m: f64,
}

pub fn size_row(mass_kg: f64, x0_um: f64, eta1: f64, b0: f64, c: &PhysicalConstants) -> SizeRow {
    SizeRow {
        mass_kg,
        x0_um,
        dxmax_m: delta_x_max(x0_um * 1e-6, eta1, b0, mass_kg, c),
    }
}

/// Outer product of two axes, outer axis first.
pub fn grid<A: Copy, B: Copy>(outer: &[A], inner: &[B]) -> Vec<(A, B)> {
    outer
        .iter()
        .flat_map(|&o| inner.iter().map(move |&i| (o, i)))
        .collect()
}
