//! Two-step route design and flight allocation.
//!
//! Step 1 designs a Pareto set of routes per SID, each scored under assumed
//! design flight counts, and stores the SEL grid and fuel burn of every
//! archived route. Step 2 picks one archived route per SID and distributes
//! the flight schedule over them. The one-step formulation optimizes routes
//! and allocation together, and the sensitivity study compares Step-1 fronts
//! designed under different flight counts.

mod one_step;
mod route;
mod schedule;
mod sensitivity;
mod step1;
mod step2;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::airframe::{AircraftType, Atmosphere};
use crate::moead::MoeadError;
use crate::noise::{LdenSettings, NoiseError, NoiseSettings, PopulationGrid};
use crate::trajectory::{BankLimitProfile, DepartureSettings, TrajectoryError};

pub use one_step::{one_step_dimension, one_step_optimize, one_step_optimize_with_observer, OneStepResult, OneStepSolution};
pub use route::{decode_route, route_bounds, route_dimension, route_objectives, route_outcome, simulate_route, RouteDesign, RouteOutcome, SimulatedRoute};
pub use schedule::{choose_design_counts, largest_remainder, split_counts, FlightSchedule};
pub use sensitivity::{
    containment, containment_matrix, reevaluate_archive, sensitivity_flight_counts, sensitivity_flight_counts_with_progress,
    SensitivityReport, CONTAINMENT_TOLERANCE,
};
pub use step1::{prune_archive, step1_design_routes, step1_design_routes_with_observer, ProfilePoint, RouteArchive, RouteEntry, Step1Result};
pub use step2::{
    allocation_index, allocation_violation, counts_from_slice, reevaluate_allocation, repair_allocation, step2_allocate,
    step2_allocate_with_observer, AllocationSolution, Step2Result,
};

/// Route design mode: lateral only with the standard noise-abatement
/// profile, or lateral plus per-type segmented vertical profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Mode {
    #[serde(rename = "2d")]
    TwoD,
    #[serde(rename = "3d")]
    ThreeD,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::TwoD => "2d",
            Mode::ThreeD => "3d",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "2d" => Ok(Mode::TwoD),
            "3d" => Ok(Mode::ThreeD),
            other => Err(format!("unknown mode '{other}', expected 2d or 3d")),
        }
    }
}

/// Everything a route evaluation needs besides the SID and decision vector.
#[derive(Debug, Clone)]
pub struct ModelContext {
    pub atmosphere: Atmosphere,
    pub fleet: Vec<AircraftType>,
    pub population: PopulationGrid,
    pub departure: DepartureSettings,
    pub noise: NoiseSettings,
    pub lden: LdenSettings,
    pub bank_limits: BankLimitProfile,
    /// Upper bound on segment flight-path angle commands, rad.
    pub segment_gamma_max: f64,
}

impl ModelContext {
    pub fn new(fleet: Vec<AircraftType>, population: PopulationGrid) -> Self {
        let departure = DepartureSettings::default();
        Self {
            atmosphere: Atmosphere::default(),
            fleet,
            population,
            segment_gamma_max: departure.max_flight_path_angle,
            departure,
            noise: NoiseSettings::default(),
            lden: LdenSettings::default(),
            bank_limits: BankLimitProfile::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum FrameworkError {
    #[error("route archive for SID '{sid}' is empty")]
    EmptyArchive { sid: String },
    #[error("flight schedule is infeasible: {constraint}")]
    InfeasibleSchedule { constraint: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Moead(#[from] MoeadError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
}
