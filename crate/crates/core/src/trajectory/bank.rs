use serde::{Deserialize, Serialize};

use super::{Trajectory, TrajectoryError};
use crate::units::{ft, G0};

/// Bank angle in a coordinated turn, rad. Positive radius (left turn) gives positive bank.
pub fn bank_angle(v_tas: f64, radius: f64) -> Result<f64, TrajectoryError> {
    if radius == 0.0 || !radius.is_finite() {
        return Err(TrajectoryError::ZeroTurnRadius);
    }
    Ok(radius.signum() * (v_tas * v_tas / (G0 * radius.abs())).atan())
}

/// One altitude band of the bank limit: applies below `upper_altitude` (m).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BankBand {
    pub upper_altitude: f64,
    /// rad
    pub max_bank: f64,
}

/// Piecewise-constant maximum bank angle by altitude. The last band extends upwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankLimitProfile {
    pub bands: Vec<BankBand>,
}

impl Default for BankLimitProfile {
    fn default() -> Self {
        Self {
            bands: vec![
                BankBand {
                    upper_altitude: ft(1000.0),
                    max_bank: 15f64.to_radians(),
                },
                BankBand {
                    upper_altitude: ft(3000.0),
                    max_bank: 20f64.to_radians(),
                },
                BankBand {
                    upper_altitude: f64::INFINITY,
                    max_bank: 25f64.to_radians(),
                },
            ],
        }
    }
}

impl BankLimitProfile {
    pub fn max_bank_at(&self, h: f64) -> f64 {
        self.bands
            .iter()
            .find(|b| h < b.upper_altitude)
            .or(self.bands.last())
            .map_or(f64::INFINITY, |b| b.max_bank)
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.bands.is_empty() {
            return Err("bank limit profile needs at least one band".into());
        }
        if self.bands.windows(2).any(|w| w[1].upper_altitude <= w[0].upper_altitude) {
            return Err("bank limit bands must have increasing upper altitudes".into());
        }
        if self.bands.iter().any(|b| !(b.max_bank > 0.0 && b.max_bank < std::f64::consts::FRAC_PI_2)) {
            return Err("maximum bank angles must lie in (0, 90°)".into());
        }
        Ok(())
    }
}

/// Largest exceedance of the bank limit along `traj`, rad; 0 when compliant.
pub fn check_bank_limit(traj: &Trajectory, limits: &BankLimitProfile) -> f64 {
    traj.samples
        .iter()
        .map(|s| s.bank.abs() - limits.max_bank_at(s.h))
        .fold(0.0, f64::max)
}
