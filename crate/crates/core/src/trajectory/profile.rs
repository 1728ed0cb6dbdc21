use serde::{Deserialize, Serialize};

use crate::units::ft;

pub const FREE_SEGMENTS: usize = 9;

/// Throttle and flight-path angle of one post-cutback segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentControl {
    /// 0 = climb thrust, 1 = max take-off thrust.
    pub throttle: f64,
    /// Commanded flight-path angle, rad.
    pub flight_path_angle: f64,
}

/// Ten-segment vertical profile. Segment 1 (take-off thrust, V2+10 to the
/// cutback altitude) is fixed; the other nine are free.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerticalProfileParams {
    pub segments: [SegmentControl; FREE_SEGMENTS],
}

impl VerticalProfileParams {
    pub const DIMENSION: usize = 2 * FREE_SEGMENTS;

    /// Decodes `[throttle_2, gamma_2, …, throttle_10, gamma_10]`.
    pub fn from_slice(x: &[f64]) -> Self {
        assert_eq!(x.len(), Self::DIMENSION, "vertical profile needs {} values", Self::DIMENSION);
        let mut segments = [SegmentControl {
            throttle: 0.0,
            flight_path_angle: 0.0,
        }; FREE_SEGMENTS];
        for (k, seg) in segments.iter_mut().enumerate() {
            seg.throttle = x[2 * k];
            seg.flight_path_angle = x[2 * k + 1];
        }
        Self { segments }
    }

    pub fn to_vec(&self) -> Vec<f64> {
        self.segments
            .iter()
            .flat_map(|s| [s.throttle, s.flight_path_angle])
            .collect()
    }

    pub fn lower_bounds() -> Vec<f64> {
        vec![0.0; Self::DIMENSION]
    }

    pub fn upper_bounds(gamma_max: f64) -> Vec<f64> {
        (0..Self::DIMENSION)
            .map(|j| if j % 2 == 0 { 1.0 } else { gamma_max })
            .collect()
    }

    /// Every segment flown at one setting.
    pub fn uniform(throttle: f64, flight_path_angle: f64) -> Self {
        Self {
            segments: [SegmentControl {
                throttle,
                flight_path_angle,
            }; FREE_SEGMENTS],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum VerticalProfile {
    /// Fixed noise-abatement procedure: take-off thrust at V2+10 to the
    /// cutback altitude, then climb thrust while accelerating to clean speed,
    /// then a climb-thrust climb to the terminal conditions.
    Nadp2,
    Segmented(VerticalProfileParams),
    /// One throttle/flight-path setting from the first sample on; no take-off segment.
    Constant { throttle: f64, flight_path_angle: f64 },
}

/// Integrator and procedure settings shared by every departure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepartureSettings {
    /// Fixed RK4 time step, s.
    pub step_s: f64,
    /// Width of the bracket left by event bisection, s.
    pub event_tolerance_s: f64,
    /// s
    pub max_flight_time_s: f64,
    /// Upper bound on any flight-path angle, rad.
    pub max_flight_path_angle: f64,
    /// m
    pub cutback_altitude: f64,
    /// Fraction of excess specific power spent climbing while accelerating to clean speed.
    pub nadp2_acceleration_share: f64,
    /// Same fraction once clean.
    pub nadp2_climb_share: f64,
}

impl Default for DepartureSettings {
    fn default() -> Self {
        Self {
            step_s: 0.5,
            event_tolerance_s: 1e-9,
            max_flight_time_s: 3600.0,
            max_flight_path_angle: 0.2,
            cutback_altitude: ft(800.0),
            nadp2_acceleration_share: 0.3,
            nadp2_climb_share: 0.7,
        }
    }
}

impl DepartureSettings {
    pub fn validate(&self) -> Result<(), String> {
        let pos = |v: f64| v > 0.0 && v.is_finite();
        if !(pos(self.step_s) && pos(self.event_tolerance_s) && pos(self.max_flight_time_s)) {
            return Err("step, event tolerance and maximum flight time must be positive".into());
        }
        if self.event_tolerance_s >= self.step_s {
            return Err("event tolerance must be smaller than the step".into());
        }
        if !(self.max_flight_path_angle > 0.0 && self.max_flight_path_angle < 15f64.to_radians()) {
            return Err("maximum flight-path angle must lie in (0, 15°)".into());
        }
        if !(self.cutback_altitude >= 0.0) {
            return Err("cutback altitude must be non-negative".into());
        }
        let share = |f: f64| f > 0.0 && f < 1.0;
        if !(share(self.nadp2_acceleration_share) && share(self.nadp2_climb_share)) {
            return Err("climb shares must lie in (0, 1)".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slice_round_trip() {
        let x: Vec<f64> = (0..18).map(|j| j as f64 * 0.01).collect();
        let p = VerticalProfileParams::from_slice(&x);
        assert_eq!(p.segments[1].throttle, 0.02);
        assert_eq!(p.segments[1].flight_path_angle, 0.03);
        assert_eq!(p.to_vec(), x);
    }

    #[test]
    fn bounds_alternate() {
        let u = VerticalProfileParams::upper_bounds(0.1);
        assert_eq!(u.len(), 18);
        assert_eq!((u[0], u[1]), (1.0, 0.1));
    }

    #[test]
    fn default_settings_are_valid() {
        DepartureSettings::default().validate().unwrap();
        let bad = DepartureSettings {
            max_flight_path_angle: 0.3,
            ..DepartureSettings::default()
        };
        assert!(bad.validate().is_err());
    }
}
