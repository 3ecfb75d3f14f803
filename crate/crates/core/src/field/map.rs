use alloc::vec::Vec;

use crate::math::Vec3;

use super::FieldSource;

/// Slice through the chip.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Plane {
    /// Constant-x slice; in-plane coordinates `(y, z)`.
    Yz { x: f64 },
    /// Constant-z slice; in-plane coordinates `(x, y)`.
    Xy { z: f64 },
}

/// Square `resolution × resolution` grid centred on `center` (in-plane
/// coordinates, m) spanning `±half_extent` on both in-plane axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub plane: Plane,
    pub center: [f64; 2],
    pub half_extent: f64,
    pub resolution: usize,
}

impl GridSpec {
    /// Grid points in row-major order: the second in-plane coordinate selects
    /// the row, the first runs along it.
    pub fn points(&self) -> Vec<Vec3> {
        let n = self.resolution.max(1);
        let coord = |c: f64, i: usize| {
            if n == 1 {
                c
            } else {
                c - self.half_extent + 2.0 * self.half_extent * i as f64 / (n - 1) as f64
            }
        };
        let mut out = Vec::with_capacity(n * n);
        for row in 0..n {
            let v = coord(self.center[1], row);
            for col in 0..n {
                let u = coord(self.center[0], col);
                out.push(match self.plane {
                    Plane::Yz { x } => Vec3::new(x, u, v),
                    Plane::Xy { z } => Vec3::new(u, v, z),
                });
            }
        }
        out
    }
}

/// One grid point. `field` is `None` where the model cannot be evaluated
/// (inside a conductor or on a filament).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub position: Vec3,
    pub field: Option<Vec3>,
}

impl FieldSample {
    pub fn evaluate<S: FieldSource + ?Sized>(model: &S, position: Vec3) -> Self {
        Self {
            position,
            field: model.field(&position).ok(),
        }
    }

    pub fn norm(&self) -> Option<f64> {
        self.field.map(|b| b.norm())
    }
}

/// Samples the model on every point of `grid`, masking failures.
pub fn field_map<S: FieldSource + ?Sized>(model: &S, grid: &GridSpec) -> Vec<FieldSample> {
    grid.points()
        .into_iter()
        .map(|p| FieldSample::evaluate(model, p))
        .collect()
}
