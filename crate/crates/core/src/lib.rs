//! Departure route design and flight allocation.
//!
//! The crate is organised bottom-up:
//!
//! * [`airframe`]: ISA atmosphere and per-aircraft thrust, drag and fuel-flow models.
//! * [`trajectory`]: TF/RF ground-track synthesis, vertical profiles and the
//!   point-mass departure integrator.
//! * [`noise`]: SEL fields from an NPD table, Lden aggregation and the
//!   dose-response annoyance objective.
//! * [`moead`]: bi-objective MOEA/D with Tchebycheff decomposition and an
//!   external Pareto archive.
//! * [`framework`]: two-step route design and allocation, the integrated
//!   one-step formulation and the flight-count sensitivity study.
//! * [`scenario_io`]: scenario, aircraft and grid loaders, route archive files and exports.

pub mod airframe;
pub mod framework;
pub mod moead;
pub mod noise;
pub mod scenario_io;
pub mod trajectory;
pub mod units;

pub use airframe::{AircraftType, Atmosphere};
pub use framework::{AllocationSolution, FlightSchedule, Mode, RouteArchive};
pub use moead::{MoeadConfig, ParetoArchive};
pub use noise::{OperationCounts, Period, PopulationGrid, SelGrid};
pub use trajectory::{SidDefinition, Trajectory};
