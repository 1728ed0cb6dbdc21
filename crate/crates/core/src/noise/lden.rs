use serde::{Deserialize, Serialize};

use super::{NeumaierSum, NoiseError, PopulationGrid, SelGrid};

/// Operating period of a movement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Period {
    Day,
    Evening,
    Night,
}

impl Period {
    pub const ALL: [Period; 3] = [Period::Day, Period::Evening, Period::Night];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Period::Day => "day",
            Period::Evening => "evening",
            Period::Night => "night",
        }
    }
}

/// Lden weighting and averaging period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdenSettings {
    /// Penalty per period in dB, indexed by [`Period::index`].
    pub weights_db: [f64; 3],
    /// Averaging period, s.
    pub period_s: f64,
}

impl Default for LdenSettings {
    fn default() -> Self {
        Self {
            weights_db: [0.0, 5.0, 10.0],
            period_s: 24.0 * 3600.0,
        }
    }
}

impl LdenSettings {
    /// Linear multiplier `10^(w/10)` per period.
    pub fn period_factors(&self) -> [f64; 3] {
        self.weights_db.map(|w| 10f64.powf(w / 10.0))
    }
}

/// Movements per (route, aircraft type, period).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OperationCounts {
    routes: usize,
    types: usize,
    counts: Vec<u32>,
}

impl OperationCounts {
    pub fn zeros(routes: usize, types: usize) -> Self {
        Self {
            routes,
            types,
            counts: vec![0; routes * types * 3],
        }
    }

    /// Builds from `[route][type][period]` nested data.
    pub fn from_nested(nested: &[Vec<[u32; 3]>]) -> Self {
        let routes = nested.len();
        let types = nested.first().map_or(0, |r| r.len());
        let mut c = Self::zeros(routes, types);
        for (k, row) in nested.iter().enumerate() {
            assert_eq!(row.len(), types, "ragged operation counts");
            for (i, per) in row.iter().enumerate() {
                for p in Period::ALL {
                    c.set(k, i, p, per[p.index()]);
                }
            }
        }
        c
    }

    pub fn routes(&self) -> usize {
        self.routes
    }

    pub fn types(&self) -> usize {
        self.types
    }

    fn slot(&self, route: usize, ac_type: usize, period: Period) -> usize {
        assert!(route < self.routes && ac_type < self.types);
        (route * self.types + ac_type) * 3 + period.index()
    }

    pub fn get(&self, route: usize, ac_type: usize, period: Period) -> u32 {
        self.counts[self.slot(route, ac_type, period)]
    }

    pub fn set(&mut self, route: usize, ac_type: usize, period: Period, value: u32) {
        let s = self.slot(route, ac_type, period);
        self.counts[s] = value;
    }

    pub fn add(&mut self, route: usize, ac_type: usize, period: Period, value: u32) {
        let s = self.slot(route, ac_type, period);
        self.counts[s] += value;
    }

    /// All periods summed for one (route, type).
    pub fn movements(&self, route: usize, ac_type: usize) -> u32 {
        Period::ALL.iter().map(|&p| self.get(route, ac_type, p)).sum()
    }

    pub fn route_total(&self, route: usize) -> u32 {
        (0..self.types).map(|i| self.movements(route, i)).sum()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| c as u64).sum()
    }

    pub fn scaled(&self, factor: u32) -> Self {
        Self {
            counts: self.counts.iter().map(|c| c * factor).collect(),
            ..self.clone()
        }
    }

    /// Period-weighted movement count `Σ_t a_t · 10^(w_t/10)` for one (route, type).
    pub fn weighted(&self, route: usize, ac_type: usize, factors: &[f64; 3]) -> f64 {
        Period::ALL
            .iter()
            .map(|&p| self.get(route, ac_type, p) as f64 * factors[p.index()])
            .sum()
    }
}

/// `Σ_k Σ_i Σ_t a_kit · 10^((SEL_ki + w_t)/10)` for one cell.
///
/// `sel[k][i]` is the SEL of type `i` on route `k` at the cell.
pub fn cell_energy(sel: &[Vec<f64>], counts: &OperationCounts, settings: &LdenSettings) -> f64 {
    let factors = settings.period_factors();
    let mut acc = NeumaierSum::default();
    for (k, row) in sel.iter().enumerate() {
        for (i, &s) in row.iter().enumerate() {
            let w = counts.weighted(k, i, &factors);
            if w > 0.0 {
                acc.add(w * 10f64.powf(s / 10.0));
            }
        }
    }
    acc.total()
}

/// Converts a period-weighted energy sum to Lden; zero energy maps to `-∞`.
pub fn lden_from_energy(energy: f64, settings: &LdenSettings) -> f64 {
    if energy > 0.0 {
        10.0 * energy.log10() - 10.0 * settings.period_s.log10()
    } else {
        f64::NEG_INFINITY
    }
}

/// Lden of one cell, dBA. Returns `-∞` when every count is zero.
pub fn lden_cell(sel: &[Vec<f64>], counts: &OperationCounts, settings: &LdenSettings) -> f64 {
    lden_from_energy(cell_energy(sel, counts, settings), settings)
}

pub const ANNOYANCE_THRESHOLD_DB: f64 = 37.0;

/// Percentage of people annoyed at `lden` (dose-response cubic above 37 dBA,
/// zero at or below, capped at 100).
pub fn percent_annoyed(lden: f64) -> f64 {
    if lden.is_nan() || lden <= ANNOYANCE_THRESHOLD_DB {
        return 0.0;
    }
    let d = lden - ANNOYANCE_THRESHOLD_DB;
    let pa = 8.588e-6 * d * d * d + 1.777e-2 * d * d + 1.221 * d;
    pa.min(100.0)
}

fn check_geometry(pop: &PopulationGrid, sel_grids: &[Vec<&SelGrid>]) -> Result<(), NoiseError> {
    for g in sel_grids.iter().flatten() {
        if !g.geometry.same_as(&pop.geometry) || g.sel.len() != pop.population.len() {
            return Err(NoiseError::GeometryMismatch);
        }
    }
    Ok(())
}

/// Per-cell Lden from stored SEL grids indexed `[route][type]`.
pub fn lden_grid(
    geometry_of: &PopulationGrid,
    sel_grids: &[Vec<&SelGrid>],
    counts: &OperationCounts,
    settings: &LdenSettings,
) -> Result<Vec<f64>, NoiseError> {
    check_geometry(geometry_of, sel_grids)?;
    check_counts(sel_grids, counts)?;
    let factors = settings.period_factors();
    let weights: Vec<Vec<f64>> = sel_grids
        .iter()
        .enumerate()
        .map(|(k, row)| (0..row.len()).map(|i| counts.weighted(k, i, &factors)).collect())
        .collect();
    let cells = geometry_of.population.len();
    Ok((0..cells)
        .map(|c| {
            let mut acc = NeumaierSum::default();
            for (k, row) in sel_grids.iter().enumerate() {
                for (i, g) in row.iter().enumerate() {
                    let w = weights[k][i];
                    if w > 0.0 {
                        acc.add(w * 10f64.powf(g.sel[c] as f64 / 10.0));
                    }
                }
            }
            lden_from_energy(acc.total(), settings)
        })
        .collect())
}

fn check_counts(sel_grids: &[Vec<&SelGrid>], counts: &OperationCounts) -> Result<(), NoiseError> {
    if counts.routes() != sel_grids.len() || sel_grids.iter().any(|row| row.len() != counts.types()) {
        return Err(NoiseError::CountShapeMismatch);
    }
    Ok(())
}

/// Number of people annoyed: `Σ_cells pop · %PA(Lden) / 100`.
pub fn people_annoyed(
    pop: &PopulationGrid,
    sel_grids: &[Vec<&SelGrid>],
    counts: &OperationCounts,
    settings: &LdenSettings,
) -> Result<f64, NoiseError> {
    let lden = lden_grid(pop, sel_grids, counts, settings)?;
    Ok(people_annoyed_from_lden(pop, &lden))
}

pub fn people_annoyed_from_lden(pop: &PopulationGrid, lden: &[f64]) -> f64 {
    let mut acc = NeumaierSum::default();
    for (p, l) in pop.population.iter().zip(lden) {
        if *p > 0.0 {
            acc.add(p * percent_annoyed(*l) / 100.0);
        }
    }
    acc.total()
}

/// Cells with `Lden ≥ threshold`.
pub fn contour_cells(lden: &[f64], threshold_db: f64) -> Vec<bool> {
    lden.iter().map(|&l| l >= threshold_db).collect()
}
