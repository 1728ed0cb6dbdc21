//! Standard atmosphere and aircraft performance models.

mod aircraft;
mod atmosphere;

pub use aircraft::{AircraftType, FlapConfiguration, FuelFlowModel, ThrustLapse};
pub use atmosphere::{Atmosphere, GAS_CONSTANT_AIR, TROPOPAUSE_M};

#[cfg(test)]
pub(crate) use aircraft::tests::synthetic_aircraft;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AirframeError {
    #[error("altitude {0} m is outside the supported range [0, 11000] m")]
    AltitudeOutOfRange(f64),
    #[error("equivalent airspeed {0} m/s is outside every flap configuration band")]
    SpeedOutsideFlapSchedule(f64),
    #[error("atmosphere constants must be positive and keep the tropopause temperature above zero")]
    InvalidAtmosphere,
    #[error("aircraft '{name}': {rule}")]
    InvalidAircraft { name: String, rule: String },
}
