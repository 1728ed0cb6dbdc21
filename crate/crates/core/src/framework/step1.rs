use serde::{Deserialize, Serialize};

use super::route::{route_bounds, route_dimension, route_objectives, route_outcome, simulate_route, RouteOutcome};
use super::{FrameworkError, Mode, ModelContext};
use crate::moead::{
    generate_weights, optimize_with_observer, tchebycheff, ArchiveEntry, Evaluation, GenerationReport, MoeadConfig,
    OptimizationResult, Problem, VariableBounds,
};
use crate::noise::{GridGeometry, SelGrid};
use crate::trajectory::{SidDefinition, TrackVertex};

/// Spacing of stored ground-track vertices, m.
const TRACK_VERTEX_SPACING: f64 = 100.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilePoint {
    pub time: f64,
    pub s: f64,
    pub h: f64,
    pub v_eas: f64,
    pub thrust: f64,
}

/// One Pareto-optimal route with everything Step 2 and the exporters need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteEntry {
    pub x: Vec<f64>,
    /// `(N_pa, T_fuel)` under the archive's design counts.
    pub objectives: [f64; 2],
    /// kg per flight, per type.
    pub fuel: Vec<f64>,
    /// m per type.
    pub distance: Vec<f64>,
    /// s per type.
    pub flight_time: Vec<f64>,
    pub sel: Vec<SelGrid>,
    pub track: Vec<TrackVertex>,
    pub profiles: Vec<Vec<ProfilePoint>>,
}

impl RouteEntry {
    pub fn outcome(&self) -> RouteOutcome {
        RouteOutcome {
            sel: self.sel.clone(),
            fuel: self.fuel.clone(),
        }
    }
}

/// Step-1 result for one SID.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteArchive {
    pub sid: String,
    pub mode: Mode,
    pub aircraft: Vec<String>,
    /// Movements per type and period assumed during route design.
    pub design_counts: Vec<[u32; 3]>,
    pub geometry: GridGeometry,
    pub entries: Vec<RouteEntry>,
}

impl RouteArchive {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn front(&self) -> Vec<[f64; 2]> {
        self.entries.iter().map(|e| e.objectives).collect()
    }
}

pub(crate) struct RouteProblem<'a> {
    pub ctx: &'a ModelContext,
    pub sid: &'a SidDefinition,
    pub mode: Mode,
    pub counts: &'a [[u32; 3]],
    pub bounds: Vec<VariableBounds>,
}

impl<'a> RouteProblem<'a> {
    pub fn new(ctx: &'a ModelContext, sid: &'a SidDefinition, mode: Mode, counts: &'a [[u32; 3]]) -> Self {
        Self {
            ctx,
            sid,
            mode,
            counts,
            bounds: route_bounds(sid, mode, ctx.fleet.len(), ctx.segment_gamma_max),
        }
    }
}

impl Problem for RouteProblem<'_> {
    fn bounds(&self) -> &[VariableBounds] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let route = match simulate_route(self.ctx, self.sid, self.mode, x) {
            Ok(r) => r,
            Err(violation) => {
                return Evaluation {
                    f: [0.0, 0.0],
                    violation,
                }
            }
        };
        if route.bank_violation > 0.0 {
            return Evaluation {
                f: [0.0, 0.0],
                violation: route.bank_violation,
            };
        }
        let outcome = route_outcome(self.ctx, &route);
        Evaluation::feasible_pair(route_objectives(self.ctx, &outcome, self.counts))
    }
}

impl Evaluation {
    pub(crate) fn feasible_pair(f: [f64; 2]) -> Self {
        Self { f, violation: 0.0 }
    }
}

/// Keeps at most `cap` entries: for each weight vector, the entry with the
/// smallest Tchebycheff value on range-normalised objectives.
pub fn prune_archive(entries: &[ArchiveEntry], cap: usize) -> Vec<ArchiveEntry> {
    if entries.len() <= cap || cap < 2 {
        return entries.to_vec();
    }
    let lo = [0, 1].map(|j| entries.iter().map(|e| e.f[j]).fold(f64::INFINITY, f64::min));
    let hi = [0, 1].map(|j| entries.iter().map(|e| e.f[j]).fold(f64::NEG_INFINITY, f64::max));
    let norm = |f: &[f64; 2]| [0, 1].map(|j| if hi[j] > lo[j] { (f[j] - lo[j]) / (hi[j] - lo[j]) } else { 0.0 });
    let mut keep = vec![false; entries.len()];
    for w in generate_weights(cap) {
        let best = (0..entries.len())
            .min_by(|&a, &b| {
                let ga = tchebycheff(&norm(&entries[a].f), &w, &[0.0, 0.0]);
                let gb = tchebycheff(&norm(&entries[b].f), &w, &[0.0, 0.0]);
                ga.total_cmp(&gb).then(a.cmp(&b))
            })
            .expect("non-empty archive");
        keep[best] = true;
    }
    entries
        .iter()
        .zip(keep)
        .filter(|(_, k)| *k)
        .map(|(e, _)| e.clone())
        .collect()
}

/// Re-simulates an archived decision vector and stores its grids, fuel and geometry.
pub fn build_route_entry(
    ctx: &ModelContext,
    sid: &SidDefinition,
    mode: Mode,
    counts: &[[u32; 3]],
    x: &[f64],
) -> Result<RouteEntry, FrameworkError> {
    let route = simulate_route(ctx, sid, mode, x).map_err(|v| {
        FrameworkError::InvalidInput(format!("archived route of SID '{}' no longer simulates (violation {v})", sid.name))
    })?;
    let outcome = route_outcome(ctx, &route);
    let objectives = route_objectives(ctx, &outcome, counts);
    Ok(RouteEntry {
        x: x.to_vec(),
        objectives,
        fuel: outcome.fuel,
        distance: route.trajectories.iter().map(|t| t.distance()).collect(),
        flight_time: route.trajectories.iter().map(|t| t.duration()).collect(),
        sel: outcome.sel,
        track: route.track.polyline(TRACK_VERTEX_SPACING),
        profiles: route
            .trajectories
            .iter()
            .map(|t| {
                t.samples
                    .iter()
                    .map(|s| ProfilePoint {
                        time: s.time,
                        s: s.s,
                        h: s.h,
                        v_eas: s.v_eas,
                        thrust: s.thrust,
                    })
                    .collect()
            })
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct Step1Result {
    pub archive: RouteArchive,
    pub optimization: OptimizationResult,
}

/// Step 1: bi-objective route design for one SID under assumed flight counts.
pub fn step1_design_routes(
    ctx: &ModelContext,
    sid: &SidDefinition,
    design_counts: &[[u32; 3]],
    mode: Mode,
    cfg: &MoeadConfig,
) -> Result<Step1Result, FrameworkError> {
    step1_design_routes_with_observer(ctx, sid, design_counts, mode, cfg, |_| {})
}

pub fn step1_design_routes_with_observer(
    ctx: &ModelContext,
    sid: &SidDefinition,
    design_counts: &[[u32; 3]],
    mode: Mode,
    cfg: &MoeadConfig,
    observer: impl FnMut(&GenerationReport<'_>),
) -> Result<Step1Result, FrameworkError> {
    if design_counts.len() != ctx.fleet.len() {
        return Err(FrameworkError::InvalidInput(format!(
            "design counts list {} types, fleet has {}",
            design_counts.len(),
            ctx.fleet.len()
        )));
    }
    if design_counts.iter().flatten().all(|&c| c == 0) {
        return Err(FrameworkError::InvalidInput(format!(
            "SID '{}' has no assumed flights to design for",
            sid.name
        )));
    }
    sid.validate()?;
    let problem = RouteProblem::new(ctx, sid, mode, design_counts);
    debug_assert_eq!(problem.bounds.len(), route_dimension(mode, ctx.fleet.len()));
    let optimization = optimize_with_observer(&problem, cfg, observer)?;
    if optimization.archive.is_empty() {
        return Err(FrameworkError::EmptyArchive { sid: sid.name.clone() });
    }
    let kept = prune_archive(optimization.archive.entries(), cfg.population_size);
    let entries = kept
        .iter()
        .map(|e| build_route_entry(ctx, sid, mode, design_counts, &e.x))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Step1Result {
        archive: RouteArchive {
            sid: sid.name.clone(),
            mode,
            aircraft: ctx.fleet.iter().map(|a| a.name.clone()).collect(),
            design_counts: design_counts.to_vec(),
            geometry: ctx.population.geometry,
            entries,
        },
        optimization,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::tests::{micro_context, micro_sids};
    use crate::moead::{dominates, hypervolume_2d};
    use crate::noise::PopulationGrid;
    use rand::{Rng, SeedableRng};

    fn cfg(seed: u64) -> MoeadConfig {
        MoeadConfig {
            population_size: 16,
            max_iterations: 25,
            neighborhood_size: 4,
            rng_seed: seed,
            ..MoeadConfig::default()
        }
    }

    #[test]
    fn archive_matches_evaluations_and_is_non_dominated() {
        let ctx = micro_context();
        let sid = &micro_sids()[0];
        let counts = vec![[30, 5, 5]];
        let r = step1_design_routes(&ctx, sid, &counts, Mode::TwoD, &cfg(1)).unwrap();
        let a = &r.archive;
        assert!(!a.is_empty() && a.len() <= 16);
        for e in &a.entries {
            assert!(a.entries.iter().all(|o| !dominates(&o.objectives, &e.objectives)));
            assert_eq!(e.sel.len(), 1);
            assert!(e.sel[0].geometry.same_as(&ctx.population.geometry));
            let again = route_objectives(&ctx, &e.outcome(), &counts);
            assert_eq!(again, e.objectives);
            let expected = r.optimization.archive.entries().iter().find(|o| o.x == e.x).unwrap();
            assert_eq!(expected.f, e.objectives);
        }
    }

    #[test]
    fn zero_population_collapses_to_fuel_optimum() {
        let mut ctx = micro_context();
        ctx.population = PopulationGrid::uniform(ctx.population.geometry, 0.0).unwrap();
        let r = step1_design_routes(&ctx, &micro_sids()[0], &[[10, 0, 0]], Mode::TwoD, &cfg(2)).unwrap();
        assert_eq!(r.archive.len(), 1);
        assert_eq!(r.archive.entries[0].objectives[0], 0.0);
    }

    #[test]
    fn mirrored_scenario_gives_identical_objectives() {
        let ctx = micro_context();
        let sid = micro_sids()[0].clone();
        let mut mctx = micro_context();
        mctx.population = ctx.population.mirrored_y(sid.runway_start.1);
        let msid = sid.mirrored();
        let counts = [[20, 4, 6]];
        let p = RouteProblem::new(&ctx, &sid, Mode::TwoD, &counts);
        let mp = RouteProblem::new(&mctx, &msid, Mode::TwoD, &counts);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let mut feasible = 0;
        for _ in 0..40 {
            let x: Vec<f64> = p.bounds.iter().map(|b| rng.gen_range(b.lower..=b.upper)).collect();
            let mx = vec![x[0], -x[1], 2.0 * sid.initial_heading - x[2], x[3], -x[4]];
            let (a, b) = (p.evaluate(&x), mp.evaluate(&mx));
            assert_eq!(a.is_feasible(), b.is_feasible());
            if a.is_feasible() {
                feasible += 1;
                for j in 0..2 {
                    assert!((a.f[j] - b.f[j]).abs() <= 1e-9 * a.f[j].abs().max(1.0), "{:?} vs {:?}", a.f, b.f);
                }
            }
        }
        assert!(feasible > 0);
    }

    #[test]
    fn micro_front_spans_direct_and_detour_routes() {
        let ctx = micro_context();
        let sid = &micro_sids()[0];
        let counts = [[40, 0, 0]];
        let p = RouteProblem::new(&ctx, sid, Mode::TwoD, &counts);
        // Brute-force front from dense random sampling.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let mut sampled = crate::moead::ParetoArchive::new();
        for _ in 0..1500 {
            let x: Vec<f64> = p.bounds.iter().map(|b| rng.gen_range(b.lower..=b.upper)).collect();
            let e = p.evaluate(&x);
            sampled.insert(ArchiveEntry { x, f: e.f, violation: e.violation });
        }
        let r = step1_design_routes(&ctx, sid, &counts, Mode::TwoD, &MoeadConfig {
            population_size: 20,
            max_iterations: 60,
            neighborhood_size: 5,
            rng_seed: 3,
            ..MoeadConfig::default()
        })
        .unwrap();
        let front = r.archive.front();
        assert!(front.len() >= 2, "{front:?}");
        for w in front.windows(2) {
            assert!(w[0][0] < w[1][0] && w[0][1] > w[1][1]);
        }
        let sampled_front = sampled.front();
        let worst = [0, 1].map(|j| sampled_front.iter().chain(&front).map(|p| p[j]).fold(0.0, f64::max) * 1.1 + 1.0);
        let hv_opt = hypervolume_2d(&front, worst);
        let hv_ref = hypervolume_2d(&sampled_front, worst);
        assert!(hv_opt >= 0.98 * hv_ref, "{hv_opt} vs sampled {hv_ref}");
        // The quiet end flies further than the fuel-optimal end.
        let quiet = &r.archive.entries[0];
        let frugal = r.archive.entries.last().unwrap();
        assert!(quiet.distance[0] > frugal.distance[0]);
    }

    #[test]
    fn pruning_caps_size() {
        let entries: Vec<ArchiveEntry> = (0..40)
            .map(|i| {
                let t = i as f64 / 39.0;
                ArchiveEntry { x: vec![t], f: [t, 1.0 - t.sqrt()], violation: 0.0 }
            })
            .collect();
        let kept = prune_archive(&entries, 10);
        assert!(kept.len() <= 10 && kept.len() >= 5);
        assert_eq!(kept[0].f, entries[0].f);
        assert_eq!(kept.last().unwrap().f, entries[39].f);
        assert_eq!(prune_archive(&entries[..5], 10).len(), 5);
    }
}
