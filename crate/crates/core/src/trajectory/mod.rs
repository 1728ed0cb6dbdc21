//! Departure parameterization and flight simulation.
//!
//! A route is a TF/RF ground track plus a vertical profile. The point-mass
//! equations of motion in EAS form are integrated with fixed-step RK4 in
//! time; control switches (cutback, flap retraction, segment boundaries,
//! terminal conditions) are located by bisection so that every step inside a
//! phase sees a smooth right-hand side.

mod bank;
mod integrate;
mod profile;
pub(crate) mod sid;
mod track;

pub use bank::{bank_angle, check_bank_limit, BankBand, BankLimitProfile};
pub use integrate::{eas_tas_convert, integrate_departure, simulate_for, Conversion};
pub use profile::{DepartureSettings, SegmentControl, VerticalProfile, VerticalProfileParams, FREE_SEGMENTS};
pub use sid::{SidDefinition, TrackBounds};
pub use track::{
    normalize_heading, synthesize_track, GroundTrack, GroundTrackParams, Leg, LegKind, TrackError, TrackPoint,
    TrackVertex,
};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airframe::AirframeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    /// s
    pub time: f64,
    /// m
    pub x: f64,
    pub y: f64,
    /// Along-track distance, m.
    pub s: f64,
    /// m
    pub h: f64,
    /// m/s
    pub v_eas: f64,
    pub v_tas: f64,
    /// N
    pub weight: f64,
    /// N
    pub thrust: f64,
    /// rad
    pub gamma: f64,
    /// rad, positive in left turns.
    pub bank: f64,
    /// kg/s
    pub fuel_flow: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub aircraft: String,
    pub samples: Vec<TrajectorySample>,
    /// kg
    pub fuel_burned: f64,
    /// Samples at which the thrust model clamped its inputs.
    pub clamp_warnings: usize,
}

impl Trajectory {
    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.time - a.time,
            _ => 0.0,
        }
    }

    /// Ground distance flown, m.
    pub fn distance(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.s - a.s,
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error(transparent)]
    Track(#[from] TrackError),
    #[error(transparent)]
    Airframe(#[from] AirframeError),
    #[error("turn radius must be non-zero")]
    ZeroTurnRadius,
    #[error("departure would descend or decelerate at t = {time:.2} s (violation {violation:.4})")]
    MonotonicityInfeasible { time: f64, violation: f64 },
    #[error("terminal conditions not reached within {time:.0} s (violation {violation:.4})")]
    Timeout { time: f64, violation: f64 },
    #[error("integration produced a non-finite state at t = {time:.2} s")]
    NonFinite { time: f64 },
    #[error("SID '{name}': {rule}")]
    InvalidSid { name: String, rule: String },
}

impl TrajectoryError {
    /// Constraint-violation magnitude for the optimizer; always positive.
    pub fn violation(&self) -> f64 {
        match self {
            TrajectoryError::Track(e) => e.violation(),
            TrajectoryError::MonotonicityInfeasible { violation, .. } | TrajectoryError::Timeout { violation, .. } => {
                violation.max(1e-6)
            }
            _ => 1.0,
        }
    }
}
