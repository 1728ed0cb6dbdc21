use std::collections::BTreeMap;
use std::path::Path;

use log::warn;
use serde::Deserialize;

use super::{read_file, ScenarioIoError};
use crate::noise::{GridGeometry, PopulationGrid};

/// Coordinates must sit on the lattice to within this share of a cell.
const LATTICE_TOLERANCE: f64 = 1e-6;

#[derive(Deserialize)]
struct Row {
    x: f64,
    y: f64,
    population: f64,
}

/// Reads a CSV with columns `x,y,population` (cell centres in m, people per
/// cell) into a regular grid. Cells absent from the file get zero population.
pub fn load_population_grid(path: &Path) -> Result<PopulationGrid, ScenarioIoError> {
    parse_population_csv(&read_file(path)?, path)
}

pub fn parse_population_csv(bytes: &[u8], path: &Path) -> Result<PopulationGrid, ScenarioIoError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(bytes);
    let mut rows = Vec::new();
    for (n, r) in reader.deserialize::<Row>().enumerate() {
        let line = n + 2;
        let r = r.map_err(|e| ScenarioIoError::Parse {
            path: path.to_path_buf(),
            message: format!("line {line}: {e}"),
        })?;
        if !(r.x.is_finite() && r.y.is_finite()) {
            return Err(ScenarioIoError::invalid(path, format!("line {line}"), "coordinates must be finite"));
        }
        if !(r.population.is_finite() && r.population >= 0.0) {
            return Err(ScenarioIoError::invalid(
                path,
                format!("line {line}"),
                format!("population {} must be finite and non-negative", r.population),
            ));
        }
        rows.push((line, r));
    }
    if rows.is_empty() {
        return Err(ScenarioIoError::invalid(path, "rows", "population grid has no cells"));
    }
    let xs = distinct(rows.iter().map(|(_, r)| r.x));
    let ys = distinct(rows.iter().map(|(_, r)| r.y));
    let spacing = min_spacing(&xs).into_iter().chain(min_spacing(&ys)).fold(f64::INFINITY, f64::min);
    let cell = if spacing.is_finite() { spacing } else { 1.0 };
    let (ox, oy) = (xs[0], ys[0]);
    let nx = ((xs[xs.len() - 1] - ox) / cell).round() as usize + 1;
    let ny = ((ys[ys.len() - 1] - oy) / cell).round() as usize + 1;
    let geometry = GridGeometry::new(ox, oy, cell, nx, ny).map_err(|e| ScenarioIoError::invalid(path, "grid", e.to_string()))?;
    let mut population = vec![f64::NAN; geometry.len()];
    for (line, r) in &rows {
        let fx = (r.x - ox) / cell;
        let fy = (r.y - oy) / cell;
        if (fx - fx.round()).abs() > LATTICE_TOLERANCE || (fy - fy.round()).abs() > LATTICE_TOLERANCE {
            return Err(ScenarioIoError::invalid(
                path,
                format!("line {line}"),
                format!("({}, {}) is off the {cell} m lattice", r.x, r.y),
            ));
        }
        let idx = geometry.index(fx.round() as usize, fy.round() as usize);
        if !population[idx].is_nan() {
            return Err(ScenarioIoError::invalid(
                path,
                format!("line {line}"),
                format!("duplicate cell ({}, {})", r.x, r.y),
            ));
        }
        population[idx] = r.population;
    }
    let missing = population.iter().filter(|p| p.is_nan()).count();
    if missing > 0 {
        warn!("{}: {missing} grid cells missing, assuming zero population", path.display());
        population.iter_mut().filter(|p| p.is_nan()).for_each(|p| *p = 0.0);
    }
    PopulationGrid::new(geometry, population).map_err(|e| ScenarioIoError::invalid(path, "grid", e.to_string()))
}

fn distinct(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let map: BTreeMap<u64, f64> = values.map(|v| (ordered_bits(v), v)).collect();
    map.into_values().collect()
}

fn ordered_bits(v: f64) -> u64 {
    let b = v.to_bits();
    if b >> 63 == 1 {
        !b
    } else {
        b | (1 << 63)
    }
}

fn min_spacing(sorted: &[f64]) -> Option<f64> {
    sorted.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<PopulationGrid, ScenarioIoError> {
        parse_population_csv(text.as_bytes(), Path::new("pop.csv"))
    }

    #[test]
    fn two_by_two_lattice() {
        let g = parse("x,y,population\n0,0,1\n500,0,2\n0,500,3\n500,500,4\n").unwrap();
        assert_eq!(g.total(), 10.0);
        assert_eq!((g.geometry.nx, g.geometry.ny, g.geometry.cell_size), (2, 2, 500.0));
        assert_eq!(g.population, vec![1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn negative_population_rejected() {
        let e = parse("x,y,population\n0,0,1\n500,0,-2\n").unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }

    #[test]
    fn duplicate_coordinate_rejected() {
        let e = parse("x,y,population\n0,0,1\n500,0,2\n0,0,3\n").unwrap_err();
        assert!(e.to_string().contains("duplicate cell (0, 0)"), "{e}");
    }

    #[test]
    fn irregular_lattice_names_coordinates() {
        let e = parse("x,y,population\n0,0,1\n500,0,2\n1250,0,3\n").unwrap_err();
        assert!(e.to_string().contains("(1250, 0)"), "{e}");
    }

    #[test]
    fn missing_cells_become_zero() {
        let g = parse("x,y,population\n-500,-500,1\n500,500,4\n0,0,2\n").unwrap();
        assert_eq!((g.geometry.nx, g.geometry.ny), (3, 3));
        assert_eq!(g.total(), 7.0);
        assert_eq!(g.population[4], 2.0);
    }

    #[test]
    fn malformed_row_is_a_parse_error() {
        assert!(matches!(parse("x,y,population\n0,zero,1\n"), Err(ScenarioIoError::Parse { .. })));
        assert!(matches!(parse("x,y,population\n"), Err(ScenarioIoError::Invalid { .. })));
    }
}
