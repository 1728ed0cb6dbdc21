use serde::{Deserialize, Serialize};

use super::track::{reflect, GroundTrackParams};
use super::TrajectoryError;
use crate::units::{ft, kt};

/// Search box of the five ground-track variables of one SID.
///
/// The optimizer sees `(l1, u1, psi_mid, l2, u2)` where `u ∈ [-1, 1]` encodes a
/// signed turn radius: `sign(u) · (r_min + |u| · (r_max − r_min))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackBounds {
    /// m
    pub l1: (f64, f64),
    /// rad
    pub psi_mid: (f64, f64),
    /// m
    pub l2: (f64, f64),
    /// Minimum and maximum turn radius magnitude, m.
    pub radius: (f64, f64),
}

impl TrackBounds {
    pub const DIMENSION: usize = 5;

    pub fn lower(&self) -> [f64; 5] {
        [self.l1.0, -1.0, self.psi_mid.0, self.l2.0, -1.0]
    }

    pub fn upper(&self) -> [f64; 5] {
        [self.l1.1, 1.0, self.psi_mid.1, self.l2.1, 1.0]
    }

    pub fn min_radius(&self) -> f64 {
        self.radius.0
    }

    fn radius_of(&self, u: f64) -> f64 {
        let u = u.clamp(-1.0, 1.0);
        let sign = if u < 0.0 { -1.0 } else { 1.0 };
        sign * (self.radius.0 + u.abs() * (self.radius.1 - self.radius.0))
    }

    pub fn decode(&self, x: &[f64]) -> GroundTrackParams {
        GroundTrackParams {
            l1: x[0],
            r1: self.radius_of(x[1]),
            psi_mid: x[2],
            l2: x[3],
            r2: self.radius_of(x[4]),
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let ordered = |(a, b): (f64, f64)| a.is_finite() && b.is_finite() && a <= b;
        if !(ordered(self.l1) && ordered(self.psi_mid) && ordered(self.l2) && ordered(self.radius)) {
            return Err("track bounds must be finite with lower ≤ upper".into());
        }
        if self.l1.0 < 0.0 || self.l2.0 < 0.0 {
            return Err("straight-leg lengths must be non-negative".into());
        }
        if self.radius.0 <= 0.0 {
            return Err("minimum turn radius must be positive".into());
        }
        Ok(())
    }
}

impl Default for TrackBounds {
    fn default() -> Self {
        Self {
            l1: (0.0, 10_000.0),
            psi_mid: (-std::f64::consts::PI, std::f64::consts::PI),
            l2: (0.0, 20_000.0),
            radius: (1500.0, 15_000.0),
        }
    }
}

/// A standard instrument departure: runway start, terminal fix and terminal conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SidDefinition {
    pub name: String,
    /// m
    pub runway_start: (f64, f64),
    /// Runway heading, rad counter-clockwise from +x.
    pub initial_heading: f64,
    /// m
    pub start_altitude: f64,
    /// m
    pub terminal_fix: (f64, f64),
    /// m
    pub terminal_altitude: f64,
    /// m/s EAS
    pub terminal_eas: f64,
    /// SIDs sharing this identifier end at the same terminal point.
    pub terminal_point_id: String,
    #[serde(default)]
    pub track_bounds: TrackBounds,
}

impl SidDefinition {
    /// A SID with the usual 35 ft start, 6000 ft / 250 kt terminal conditions.
    pub fn new(
        name: impl Into<String>,
        runway_start: (f64, f64),
        initial_heading: f64,
        terminal_fix: (f64, f64),
        terminal_point_id: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            runway_start,
            initial_heading,
            start_altitude: ft(35.0),
            terminal_fix,
            terminal_altitude: ft(6000.0),
            terminal_eas: kt(250.0),
            terminal_point_id: terminal_point_id.into(),
            track_bounds: TrackBounds::default(),
        }
    }

    pub fn validate(&self) -> Result<(), TrajectoryError> {
        let bad = |rule: String| TrajectoryError::InvalidSid {
            name: self.name.clone(),
            rule,
        };
        if !(self.terminal_altitude > self.start_altitude) {
            return Err(bad("terminal altitude must exceed start altitude".into()));
        }
        if !(self.start_altitude >= 0.0 && self.terminal_altitude <= crate::airframe::TROPOPAUSE_M) {
            return Err(bad("altitudes must lie within the troposphere".into()));
        }
        if !(self.terminal_eas > 0.0) {
            return Err(bad("terminal EAS must be positive".into()));
        }
        let finite = [
            self.runway_start.0,
            self.runway_start.1,
            self.initial_heading,
            self.terminal_fix.0,
            self.terminal_fix.1,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(bad("coordinates must be finite".into()));
        }
        self.track_bounds.validate().map_err(bad)
    }

    pub fn straight_line_distance(&self) -> f64 {
        let (dx, dy) = (
            self.terminal_fix.0 - self.runway_start.0,
            self.terminal_fix.1 - self.runway_start.1,
        );
        (dx * dx + dy * dy).sqrt()
    }

    /// Reflection across the runway axis.
    pub fn mirrored(&self) -> Self {
        let h = self.initial_heading;
        let (lo, hi) = self.track_bounds.psi_mid;
        Self {
            terminal_fix: reflect(self.terminal_fix, self.runway_start, h),
            track_bounds: TrackBounds {
                psi_mid: (2.0 * h - hi, 2.0 * h - lo),
                ..self.track_bounds
            },
            ..self.clone()
        }
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    /// Runway at the origin heading east, fix 25 km out and 8 km north.
    pub(crate) fn east_sid() -> SidDefinition {
        SidDefinition::new("EAST", (0.0, 0.0), 0.0, (25_000.0, 8_000.0), "FIX")
    }

    #[test]
    fn defaults_follow_departure_conventions() {
        let s = east_sid();
        assert!((s.start_altitude - 10.668).abs() < 1e-12);
        assert!((s.terminal_altitude - 1828.8).abs() < 1e-9);
        assert!((s.terminal_eas - 128.611_111_111).abs() < 1e-6);
        s.validate().unwrap();
    }

    #[test]
    fn radius_encoding_is_signed() {
        let b = TrackBounds::default();
        let p = b.decode(&[0.0, -1.0, 0.0, 0.0, 0.5]);
        assert_eq!(p.r1, -15_000.0);
        assert_eq!(p.r2, 1500.0 + 0.5 * 13_500.0);
        assert_eq!(b.decode(&[0.0, 0.0, 0.0, 0.0, 0.0]).r1, 1500.0);
    }

    #[test]
    fn inverted_altitudes_rejected() {
        let mut s = east_sid();
        s.terminal_altitude = 5.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn mirroring_reflects_fix() {
        let m = east_sid().mirrored();
        assert!((m.terminal_fix.0 - 25_000.0).abs() < 1e-9);
        assert!((m.terminal_fix.1 + 8_000.0).abs() < 1e-9);
    }
}
