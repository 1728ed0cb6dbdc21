use serde::{Deserialize, Serialize};

use super::NoiseError;

/// Regular raster in the scenario's planar frame. Cell `(ix, iy)` has its
/// centre at `origin + (ix, iy) · cell_size`; cells are stored row-major in `iy`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    /// Centre of cell (0, 0), m.
    pub origin_x: f64,
    pub origin_y: f64,
    /// m
    pub cell_size: f64,
    pub nx: usize,
    pub ny: usize,
}

impl GridGeometry {
    pub fn new(origin_x: f64, origin_y: f64, cell_size: f64, nx: usize, ny: usize) -> Result<Self, NoiseError> {
        let g = Self {
            origin_x,
            origin_y,
            cell_size,
            nx,
            ny,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(NoiseError::InvalidGrid("cell size must be positive".into()));
        }
        if self.nx == 0 || self.ny == 0 {
            return Err(NoiseError::InvalidGrid("grid must have at least one cell".into()));
        }
        if !(self.origin_x.is_finite() && self.origin_y.is_finite()) {
            return Err(NoiseError::InvalidGrid("origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn center(&self, cell: usize) -> (f64, f64) {
        let ix = cell % self.nx;
        let iy = cell / self.nx;
        (
            self.origin_x + ix as f64 * self.cell_size,
            self.origin_y + iy as f64 * self.cell_size,
        )
    }

    pub fn centers(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        (0..self.len()).map(|c| self.center(c))
    }

    /// Same raster: identical shape and origin/cell size within 1e-9 m.
    pub fn same_as(&self, other: &GridGeometry) -> bool {
        self.nx == other.nx
            && self.ny == other.ny
            && (self.cell_size - other.cell_size).abs() < 1e-9
            && (self.origin_x - other.origin_x).abs() < 1e-9
            && (self.origin_y - other.origin_y).abs() < 1e-9
    }

    /// Mirror image across the horizontal line `y = axis_y`.
    pub fn mirrored_y(&self, axis_y: f64) -> Self {
        let top = self.origin_y + (self.ny - 1) as f64 * self.cell_size;
        Self {
            origin_y: 2.0 * axis_y - top,
            ..*self
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PopulationGrid {
    pub geometry: GridGeometry,
    /// People per cell, row-major.
    pub population: Vec<f64>,
}

impl PopulationGrid {
    pub fn new(geometry: GridGeometry, population: Vec<f64>) -> Result<Self, NoiseError> {
        let grid = Self { geometry, population };
        grid.validate()?;
        Ok(grid)
    }

    pub fn uniform(geometry: GridGeometry, people_per_cell: f64) -> Result<Self, NoiseError> {
        Self::new(geometry, vec![people_per_cell; geometry.len()])
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        self.geometry.validate()?;
        if self.population.len() != self.geometry.len() {
            return Err(NoiseError::InvalidGrid(format!(
                "population has {} cells, geometry {}",
                self.population.len(),
                self.geometry.len()
            )));
        }
        if let Some(i) = self.population.iter().position(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(NoiseError::InvalidGrid(format!(
                "cell {i} has invalid population {}",
                self.population[i]
            )));
        }
        Ok(())
    }

    pub fn total(&self) -> f64 {
        self.population.iter().sum()
    }

    /// Mirror image across `y = axis_y`.
    pub fn mirrored_y(&self, axis_y: f64) -> Self {
        let g = self.geometry;
        let mut population = vec![0.0; g.len()];
        for iy in 0..g.ny {
            for ix in 0..g.nx {
                population[g.index(ix, g.ny - 1 - iy)] = self.population[g.index(ix, iy)];
            }
        }
        Self {
            geometry: g.mirrored_y(axis_y),
            population,
        }
    }
}

/// Single-event SEL for one (route, aircraft type) over a grid, dBA.
/// Stored as 32-bit floats; every consumer works from the stored values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelGrid {
    pub geometry: GridGeometry,
    pub sel: Vec<f32>,
}

impl SelGrid {
    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.sel.len() != self.geometry.len() {
            return Err(NoiseError::GeometryMismatch);
        }
        if self.sel.iter().any(|v| !v.is_finite()) {
            return Err(NoiseError::InvalidGrid("SEL values must be finite".into()));
        }
        Ok(())
    }
}
