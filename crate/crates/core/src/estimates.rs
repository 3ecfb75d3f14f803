//! Order-of-magnitude engineering numbers for the chip.

use crate::constants::PhysicalConstants;
#[cfg_attr(feature = "std", allow(unused_imports))]
use crate::math::Float;
use crate::model::ChipConfig;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EstimateError {
    #[error("`{0}` must be positive and finite")]
    NonPositive(&'static str),
    #[error("`{0}` must be finite")]
    NonFinite(&'static str),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatingEstimate {
    /// Ω
    pub resistance: f64,
    /// J
    pub energy: f64,
}

/// Joule heat `I² R Δt` of one separation wire of length `2l` and square
/// cross-section `w²`.
pub fn heating_estimate(
    current: f64,
    config: &ChipConfig,
    duration: f64,
    c: &PhysicalConstants,
) -> Result<HeatingEstimate, EstimateError> {
    if !current.is_finite() {
        return Err(EstimateError::NonFinite("current"));
    }
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(EstimateError::NonPositive("duration"));
    }
    let w = config.wire_width;
    let resistance = c.rho_gold * 2.0 * config.sep_wire_half_length / (w * w);
    Ok(HeatingEstimate {
        resistance,
        energy: current * current * resistance * duration,
    })
}

/// Thermal diffusion length `sqrt(α_Si Δt)` in the silicon substrate.
pub fn diffusion_length(duration: f64, c: &PhysicalConstants) -> Result<f64, EstimateError> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(EstimateError::NonPositive("duration"));
    }
    Ok((c.alpha_si * duration).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_heating() {
        let c = PhysicalConstants::default();
        let h = heating_estimate(24.0, &ChipConfig::default(), 0.1, &c).unwrap();
        assert!((h.resistance - 0.0976).abs() < 1e-6);
        assert!((h.energy - 5.62).abs() < 0.01, "{}", h.energy);
        let zero = heating_estimate(0.0, &ChipConfig::default(), 0.1, &c).unwrap();
        assert_eq!(zero.energy, 0.0);
    }

    #[test]
    fn reference_diffusion() {
        let d = diffusion_length(0.1, &PhysicalConstants::default()).unwrap();
        assert!((d - 2.83e-3).abs() < 0.01e-3, "{d}");
    }

    #[test]
    fn rejects_bad_duration() {
        let c = PhysicalConstants::default();
        assert_eq!(
            diffusion_length(0.0, &c),
            Err(EstimateError::NonPositive("duration"))
        );
        assert!(heating_estimate(1.0, &ChipConfig::default(), -1.0, &c).is_err());
    }
}
