use serde::{Deserialize, Serialize};

use super::{Mode, ModelContext};
use crate::moead::VariableBounds;
use crate::noise::{people_annoyed, sel_field, OperationCounts, SelGrid};
use crate::trajectory::{
    check_bank_limit, integrate_departure, synthesize_track, GroundTrack, GroundTrackParams, SidDefinition,
    Trajectory, TrackBounds, VerticalProfile, VerticalProfileParams,
};

/// Decoded route decision vector: ground track plus one vertical profile per aircraft type.
#[derive(Debug, Clone, PartialEq)]
pub struct RouteDesign {
    pub track: GroundTrackParams,
    pub profiles: Vec<VerticalProfile>,
}

pub fn route_dimension(mode: Mode, types: usize) -> usize {
    match mode {
        Mode::TwoD => TrackBounds::DIMENSION,
        Mode::ThreeD => TrackBounds::DIMENSION + types * VerticalProfileParams::DIMENSION,
    }
}

pub fn route_bounds(sid: &SidDefinition, mode: Mode, types: usize, segment_gamma_max: f64) -> Vec<VariableBounds> {
    let b = &sid.track_bounds;
    let mut out: Vec<VariableBounds> = b
        .lower()
        .iter()
        .zip(b.upper())
        .map(|(&lo, hi)| VariableBounds::continuous(lo, hi))
        .collect();
    if mode == Mode::ThreeD {
        let lo = VerticalProfileParams::lower_bounds();
        let hi = VerticalProfileParams::upper_bounds(segment_gamma_max);
        for _ in 0..types {
            out.extend(lo.iter().zip(&hi).map(|(&l, &h)| VariableBounds::continuous(l, h)));
        }
    }
    out
}

pub fn decode_route(sid: &SidDefinition, mode: Mode, types: usize, x: &[f64]) -> RouteDesign {
    let track = sid.track_bounds.decode(&x[..TrackBounds::DIMENSION]);
    let profiles = match mode {
        Mode::TwoD => vec![VerticalProfile::Nadp2; types],
        Mode::ThreeD => (0..types)
            .map(|i| {
                let start = TrackBounds::DIMENSION + i * VerticalProfileParams::DIMENSION;
                VerticalProfile::Segmented(VerticalProfileParams::from_slice(
                    &x[start..start + VerticalProfileParams::DIMENSION],
                ))
            })
            .collect(),
    };
    RouteDesign { track, profiles }
}

/// Trajectories of every aircraft type along one route.
#[derive(Debug, Clone)]
pub struct SimulatedRoute {
    pub track: GroundTrack,
    pub trajectories: Vec<Trajectory>,
    /// Largest bank-limit exceedance over all types, rad.
    pub bank_violation: f64,
}

/// Simulates a route; on failure returns a positive constraint violation.
///
/// Violations are graded so that the optimizer prefers, in order: closing
/// geometry (`2 + gap/1000`), a flyable profile (`1 + integrator violation`),
/// and finally compliant bank angles (exceedance in rad).
pub fn simulate_route(ctx: &ModelContext, sid: &SidDefinition, mode: Mode, x: &[f64]) -> Result<SimulatedRoute, f64> {
    let design = decode_route(sid, mode, ctx.fleet.len(), x);
    let track = synthesize_track(sid, &design.track, sid.track_bounds.min_radius())
        .map_err(|e| 2.0 + e.violation() / 1000.0)?;
    let mut trajectories = Vec::with_capacity(ctx.fleet.len());
    let mut failure = 0.0;
    for (ac, profile) in ctx.fleet.iter().zip(&design.profiles) {
        match integrate_departure(ac, &ctx.atmosphere, sid, &track, profile, &ctx.departure) {
            Ok(t) => trajectories.push(t),
            Err(e) => failure += e.violation(),
        }
    }
    if failure > 0.0 {
        return Err(1.0 + failure);
    }
    let bank_violation = trajectories
        .iter()
        .map(|t| check_bank_limit(t, &ctx.bank_limits))
        .fold(0.0, f64::max);
    Ok(SimulatedRoute {
        track,
        trajectories,
        bank_violation,
    })
}

/// Stored per-route quantities that Step 2 works from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub sel: Vec<SelGrid>,
    /// kg per flight, per type.
    pub fuel: Vec<f64>,
}

pub fn route_outcome(ctx: &ModelContext, route: &SimulatedRoute) -> RouteOutcome {
    let geometry = ctx.population.geometry;
    RouteOutcome {
        sel: ctx
            .fleet
            .iter()
            .zip(&route.trajectories)
            .map(|(ac, t)| sel_field(t, ac, &geometry, &ctx.noise).grid)
            .collect(),
        fuel: route.trajectories.iter().map(|t| t.fuel_burned).collect(),
    }
}

/// `(N_pa, T_fuel)` of one route flown by `counts[i]` movements of each type.
pub fn route_objectives(ctx: &ModelContext, outcome: &RouteOutcome, counts: &[[u32; 3]]) -> [f64; 2] {
    let ops = OperationCounts::from_nested(&[counts.to_vec()]);
    let grids: Vec<&SelGrid> = outcome.sel.iter().collect();
    let npa = people_annoyed(&ctx.population, &[grids], &ops, &ctx.lden).expect("route grids share the population geometry");
    let fuel = outcome
        .fuel
        .iter()
        .zip(counts)
        .map(|(f, c)| f * c.iter().sum::<u32>() as f64)
        .sum();
    [npa, fuel]
}
