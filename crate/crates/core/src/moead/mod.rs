//! Bi-objective MOEA/D.
//!
//! Standard MOEA/D-DE: Tchebycheff sub-problems on an evenly spaced weight
//! lattice, DE/rand/1 variation with polynomial mutation, feasibility-first
//! replacement limited to `n_r` neighbours, and an unbounded external archive
//! of feasible non-dominated points.

mod archive;
mod optimizer;
mod weights;

pub use archive::{dominates, hypervolume_2d, hypervolume_2d_counted, ArchiveEntry, ParetoArchive, DUPLICATE_TOLERANCE};
pub use optimizer::{
    optimize, optimize_with_observer, write_trace_csv, Evaluation, FnProblem, GenerationReport, MoeadConfig,
    OptimizationResult, Problem, TracePoint, VariableBounds,
};
pub use weights::{generate_weights, neighborhoods, tchebycheff, ZERO_WEIGHT_GUARD};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MoeadError {
    #[error("invalid optimizer configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid variable bounds: {0}")]
    InvalidBounds(String),
}
