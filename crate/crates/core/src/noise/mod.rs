//! Aircraft noise exposure and annoyance.
//!
//! Single-event SEL fields come from an NPD table evaluated at each cell's
//! point of closest approach. Cumulative exposure is Lden with evening and
//! night penalties, and annoyance follows the %PA dose-response cubic. All
//! per-cell sums use compensated summation so that results do not depend on
//! how a grid is partitioned.

mod grid;
mod lden;
mod npd;
mod sel;

pub use grid::{GridGeometry, PopulationGrid, SelGrid};
pub use lden::{
    cell_energy, contour_cells, lden_cell, lden_from_energy, lden_grid, people_annoyed,
    people_annoyed_from_lden, percent_annoyed, LdenSettings, OperationCounts, Period,
    ANNOYANCE_THRESHOLD_DB,
};
pub use npd::{LateralAttenuation, NpdLookup, NpdTable, PreparedNpd};
pub use sel::{closest_approach, sel_at_approach, sel_field, ClosestApproach, NoiseSettings, SelField};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NoiseError {
    #[error("invalid NPD table: {0}")]
    InvalidNpd(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("SEL grid geometry does not match the population grid")]
    GeometryMismatch,
    #[error("operation counts do not match the number of routes and aircraft types")]
    CountShapeMismatch,
}

/// Neumaier-compensated running sum.
#[derive(Debug, Default, Clone, Copy)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl std::iter::FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::default();
        for x in iter {
            s.add(x);
        }
        s
    }
}
