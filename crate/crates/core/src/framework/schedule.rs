use serde::{Deserialize, Serialize};

use super::FrameworkError;
use crate::noise::{OperationCounts, Period};

/// Splits `total` in proportion to `weights`, rounding by largest remainder so
/// the parts sum to `total` exactly. Ties go to the lower index.
pub fn largest_remainder(total: u32, weights: &[f64]) -> Vec<u32> {
    let sum: f64 = weights.iter().sum();
    if weights.is_empty() {
        return Vec::new();
    }
    if !(sum > 0.0) {
        let mut out = vec![0; weights.len()];
        out[0] = total;
        return out;
    }
    let quotas: Vec<f64> = weights.iter().map(|w| total as f64 * w / sum).collect();
    let mut out: Vec<u32> = quotas.iter().map(|q| q.floor() as u32).collect();
    let assigned: u32 = out.iter().sum();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &j in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        out[j] += 1;
    }
    out
}

/// Movements to be allocated: totals per (terminal point, type, period),
/// per-route capacities and per-(route, type, period) upper bounds. Routes
/// are the SIDs, in scenario order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlightSchedule {
    pub terminal_points: Vec<String>,
    /// Terminal point index of each route.
    pub route_terminal: Vec<usize>,
    /// `totals[s][i]` = day/evening/night movements of type `i` to terminal point `s`.
    pub totals: Vec<Vec<[u32; 3]>>,
    /// Maximum movements per route.
    pub capacities: Vec<u32>,
    /// Upper bound per (route, type, period).
    pub upper_bounds: OperationCounts,
}

impl FlightSchedule {
    pub fn routes(&self) -> usize {
        self.route_terminal.len()
    }

    pub fn types(&self) -> usize {
        self.upper_bounds.types()
    }

    pub fn routes_of(&self, terminal: usize) -> impl Iterator<Item = usize> + '_ {
        self.route_terminal
            .iter()
            .enumerate()
            .filter(move |(_, &s)| s == terminal)
            .map(|(k, _)| k)
    }

    pub fn terminal_total(&self, terminal: usize) -> u32 {
        self.totals[terminal].iter().flatten().sum()
    }

    pub fn total(&self, terminal: usize, ac_type: usize, period: Period) -> u32 {
        self.totals[terminal][ac_type][period.index()]
    }

    /// Checks shapes and that the equality, capacity and bound constraints can be met together.
    pub fn validate(&self) -> Result<(), FrameworkError> {
        let shape = |m: String| Err(FrameworkError::InvalidInput(m));
        let k = self.routes();
        if self.capacities.len() != k || self.upper_bounds.routes() != k {
            return shape(format!(
                "schedule has {k} routes but {} capacities and {} bound rows",
                self.capacities.len(),
                self.upper_bounds.routes()
            ));
        }
        if self.totals.len() != self.terminal_points.len() {
            return shape("totals must list every terminal point".into());
        }
        if self.totals.iter().any(|row| row.len() != self.types()) {
            return shape("totals must list every aircraft type".into());
        }
        if let Some(s) = self.route_terminal.iter().find(|&&s| s >= self.terminal_points.len()) {
            return shape(format!("route refers to unknown terminal point index {s}"));
        }
        for (s, name) in self.terminal_points.iter().enumerate() {
            let routes: Vec<usize> = self.routes_of(s).collect();
            let demand = self.terminal_total(s);
            let capacity: u64 = routes.iter().map(|&k| self.capacities[k] as u64).sum();
            if demand as u64 > capacity {
                return Err(FrameworkError::InfeasibleSchedule {
                    constraint: format!(
                        "capacity at terminal point '{name}': {demand} movements exceed the summed route capacity {capacity}"
                    ),
                });
            }
            for i in 0..self.types() {
                for p in Period::ALL {
                    let need = self.total(s, i, p);
                    let room: u64 = routes.iter().map(|&k| self.upper_bounds.get(k, i, p) as u64).sum();
                    if need as u64 > room {
                        return Err(FrameworkError::InfeasibleSchedule {
                            constraint: format!(
                                "upper bounds at terminal point '{name}', type {i}, {} period: {need} movements exceed the summed bounds {room}",
                                p.name()
                            ),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// Type/period split of the largest number of flights route `route` can take.
    pub fn design_counts(&self, route: usize) -> Vec<[u32; 3]> {
        let s = self.route_terminal[route];
        let total = self.capacities[route].min(self.terminal_total(s));
        split_counts(total, &self.totals[s])
    }
}

/// Splits `total` movements over types and periods in proportion to `shares`.
pub fn split_counts(total: u32, shares: &[[u32; 3]]) -> Vec<[u32; 3]> {
    let weights: Vec<f64> = shares.iter().flatten().map(|&v| v as f64).collect();
    let parts = largest_remainder(total, &weights);
    parts.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()
}

/// Assumed Step-1 counts for `route`: the maximum it could be allocated.
pub fn choose_design_counts(schedule: &FlightSchedule, route: usize) -> Vec<[u32; 3]> {
    schedule.design_counts(route)
}
