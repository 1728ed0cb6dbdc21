use serde::{Deserialize, Serialize};

use super::AirframeError;
use crate::units::G0;

/// Specific gas constant of dry air, J/(kg·K).
pub const GAS_CONSTANT_AIR: f64 = 287.052_87;

/// Upper limit of the troposphere model, m.
pub const TROPOPAUSE_M: f64 = 11_000.0;

/// ISA troposphere with configurable sea-level constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atmosphere {
    /// kg/m³
    pub sea_level_density: f64,
    /// K/m, positive for temperature decreasing with altitude.
    pub temperature_lapse: f64,
    /// K
    pub sea_level_temperature: f64,
    /// Pa
    pub sea_level_pressure: f64,
}

impl Default for Atmosphere {
    fn default() -> Self {
        Self {
            sea_level_density: 1.225,
            temperature_lapse: 0.0065,
            sea_level_temperature: 288.15,
            sea_level_pressure: 101_325.0,
        }
    }
}

impl Atmosphere {
    pub fn validate(&self) -> Result<(), AirframeError> {
        let ok = self.sea_level_density > 0.0
            && self.sea_level_temperature > 0.0
            && self.sea_level_pressure > 0.0
            && self.temperature_lapse > 0.0
            && self.sea_level_temperature - self.temperature_lapse * TROPOPAUSE_M > 0.0;
        if ok {
            Ok(())
        } else {
            Err(AirframeError::InvalidAtmosphere)
        }
    }

    fn density_exponent(&self) -> f64 {
        G0 / (GAS_CONSTANT_AIR * self.temperature_lapse) - 1.0
    }

    fn check_altitude(h: f64) -> Result<(), AirframeError> {
        if (0.0..=TROPOPAUSE_M).contains(&h) {
            Ok(())
        } else {
            Err(AirframeError::AltitudeOutOfRange(h))
        }
    }

    pub fn temperature_at(&self, h: f64) -> f64 {
        self.sea_level_temperature - self.temperature_lapse * h
    }

    /// Air density at altitude `h` (m).
    pub fn density_at(&self, h: f64) -> Result<f64, AirframeError> {
        Self::check_altitude(h)?;
        Ok(self.density_unchecked(h))
    }

    /// Analytic dρ/dh at altitude `h` (m), kg/m⁴.
    pub fn density_gradient_at(&self, h: f64) -> Result<f64, AirframeError> {
        Self::check_altitude(h)?;
        Ok(self.density_gradient_unchecked(h))
    }

    /// Density without the range check; the integrator clamps altitude itself.
    pub(crate) fn density_unchecked(&self, h: f64) -> f64 {
        let ratio = self.temperature_at(h) / self.sea_level_temperature;
        self.sea_level_density * ratio.powf(self.density_exponent())
    }

    pub(crate) fn density_gradient_unchecked(&self, h: f64) -> f64 {
        let n = self.density_exponent();
        let ratio = self.temperature_at(h) / self.sea_level_temperature;
        -self.sea_level_density * n * ratio.powf(n - 1.0) * self.temperature_lapse
            / self.sea_level_temperature
    }

    /// Density and its altitude derivative in one evaluation.
    pub(crate) fn density_and_gradient(&self, h: f64) -> (f64, f64) {
        let n = self.density_exponent();
        let ratio = self.temperature_at(h) / self.sea_level_temperature;
        let pow = ratio.powf(n - 1.0);
        let rho = self.sea_level_density * pow * ratio;
        let grad = -self.sea_level_density * n * pow * self.temperature_lapse
            / self.sea_level_temperature;
        (rho, grad)
    }
}
