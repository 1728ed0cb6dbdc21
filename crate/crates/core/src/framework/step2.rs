use serde::{Deserialize, Serialize};

use super::route::{route_outcome, simulate_route};
use super::schedule::largest_remainder;
use super::{FlightSchedule, FrameworkError, ModelContext, RouteArchive};
use crate::moead::{optimize_with_observer, Evaluation, GenerationReport, MoeadConfig, OptimizationResult, Problem, VariableBounds};
use crate::noise::{
    lden_from_energy, people_annoyed, people_annoyed_from_lden, LdenSettings, NeumaierSum, OperationCounts, Period,
    PopulationGrid, SelGrid,
};
use crate::trajectory::SidDefinition;

/// Index of `a_itk` within the allocation block of a decision vector.
pub fn allocation_index(types: usize, route: usize, ac_type: usize, period: Period) -> usize {
    (route * types + ac_type) * 3 + period.index()
}

pub fn counts_from_slice(routes: usize, types: usize, a: &[f64]) -> OperationCounts {
    let mut c = OperationCounts::zeros(routes, types);
    for k in 0..routes {
        for i in 0..types {
            for p in Period::ALL {
                c.set(k, i, p, a[allocation_index(types, k, i, p)].round().max(0.0) as u32);
            }
        }
    }
    c
}

/// Restores the equality constraints: within every (type, period, terminal
/// point) group, counts are rescaled to the required total by largest
/// remainder without exceeding the per-route bounds. Feasible input is
/// returned unchanged.
pub fn repair_allocation(schedule: &FlightSchedule, a: &mut [f64]) {
    let types = schedule.types();
    for s in 0..schedule.terminal_points.len() {
        let routes: Vec<usize> = schedule.routes_of(s).collect();
        if routes.is_empty() {
            continue;
        }
        for i in 0..types {
            for p in Period::ALL {
                let target = schedule.total(s, i, p);
                let idx: Vec<usize> = routes.iter().map(|&k| allocation_index(types, k, i, p)).collect();
                let bound: Vec<u32> = routes.iter().map(|&k| schedule.upper_bounds.get(k, i, p)).collect();
                let vals: Vec<u32> = idx
                    .iter()
                    .zip(&bound)
                    .map(|(&j, &b)| (a[j].round().max(0.0) as u32).min(b))
                    .collect();
                let sum: u32 = vals.iter().sum();
                let mut out = if sum == target {
                    vals
                } else {
                    let weights: Vec<f64> = if sum > 0 {
                        vals.iter().map(|&v| v as f64).collect()
                    } else {
                        bound.iter().map(|&b| b as f64).collect()
                    };
                    largest_remainder(target, &weights)
                };
                // Move any excess over a bound to routes with room, lowest index first.
                let mut spill: u32 = 0;
                for (v, &b) in out.iter_mut().zip(&bound) {
                    if *v > b {
                        spill += *v - b;
                        *v = b;
                    }
                }
                for (v, &b) in out.iter_mut().zip(&bound) {
                    let add = spill.min(b - *v);
                    *v += add;
                    spill -= add;
                }
                for (&j, v) in idx.iter().zip(out) {
                    a[j] = v as f64;
                }
            }
        }
    }
}

/// Sum of capacity, bound and equality violations; 0 when feasible.
pub fn allocation_violation(schedule: &FlightSchedule, counts: &OperationCounts) -> f64 {
    let mut v = 0.0;
    for k in 0..schedule.routes() {
        v += (counts.route_total(k) as f64 - schedule.capacities[k] as f64).max(0.0);
        for i in 0..schedule.types() {
            for p in Period::ALL {
                v += (counts.get(k, i, p) as f64 - schedule.upper_bounds.get(k, i, p) as f64).max(0.0);
            }
        }
    }
    for s in 0..schedule.terminal_points.len() {
        for i in 0..schedule.types() {
            for p in Period::ALL {
                let sum: u32 = schedule.routes_of(s).map(|k| counts.get(k, i, p)).sum();
                v += (sum as f64 - schedule.total(s, i, p) as f64).abs();
            }
        }
    }
    v
}

/// Selected route per SID and the flight allocation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationSolution {
    /// Index into each SID's route archive.
    pub routes: Vec<usize>,
    pub counts: OperationCounts,
    /// `(N_pa, T_fuel)`
    pub objectives: [f64; 2],
}

impl AllocationSolution {
    /// Checks every allocation constraint exactly.
    pub fn check(&self, schedule: &FlightSchedule) -> Result<(), String> {
        let v = allocation_violation(schedule, &self.counts);
        if v == 0.0 {
            Ok(())
        } else {
            Err(format!("allocation violates its constraints by {v}"))
        }
    }
}

/// Linear-energy form of the stored SEL grids, `[route][entry][type][cell]`.
pub(crate) struct EnergyCache {
    energy: Vec<Vec<Vec<Vec<f64>>>>,
    fuel: Vec<Vec<Vec<f64>>>,
}

impl EnergyCache {
    pub fn new(archives: &[RouteArchive]) -> Self {
        Self {
            energy: archives
                .iter()
                .map(|a| {
                    a.entries
                        .iter()
                        .map(|e| e.sel.iter().map(|g| sel_energy(g)).collect())
                        .collect()
                })
                .collect(),
            fuel: archives
                .iter()
                .map(|a| a.entries.iter().map(|e| e.fuel.clone()).collect())
                .collect(),
        }
    }

    pub fn objectives(&self, pop: &PopulationGrid, lden: &LdenSettings, routes: &[usize], counts: &OperationCounts) -> [f64; 2] {
        let factors = lden.period_factors();
        let types = counts.types();
        let mut terms: Vec<(f64, &[f64])> = Vec::with_capacity(routes.len() * types);
        for (k, &r) in routes.iter().enumerate() {
            for i in 0..types {
                let w = counts.weighted(k, i, &factors);
                if w > 0.0 {
                    terms.push((w, &self.energy[k][r][i]));
                }
            }
        }
        let lden_cells: Vec<f64> = (0..pop.population.len())
            .map(|c| {
                let mut acc = NeumaierSum::default();
                for (w, e) in &terms {
                    acc.add(w * e[c]);
                }
                lden_from_energy(acc.total(), lden)
            })
            .collect();
        let npa = people_annoyed_from_lden(pop, &lden_cells);
        [npa, total_fuel(counts, |k, i| self.fuel[k][routes[k]][i])]
    }
}

fn sel_energy(g: &SelGrid) -> Vec<f64> {
    g.sel.iter().map(|&s| 10f64.powf(s as f64 / 10.0)).collect()
}

/// `Σ_k Σ_i a_ki · fuel_ki`.
pub(crate) fn total_fuel(counts: &OperationCounts, fuel: impl Fn(usize, usize) -> f64) -> f64 {
    let mut acc = 0.0;
    for k in 0..counts.routes() {
        for i in 0..counts.types() {
            acc += counts.movements(k, i) as f64 * fuel(k, i);
        }
    }
    acc
}

pub(crate) struct AllocationProblem<'a> {
    schedule: &'a FlightSchedule,
    pop: &'a PopulationGrid,
    lden: &'a LdenSettings,
    cache: EnergyCache,
    bounds: Vec<VariableBounds>,
}

impl<'a> AllocationProblem<'a> {
    fn new(archives: &'a [RouteArchive], schedule: &'a FlightSchedule, pop: &'a PopulationGrid, lden: &'a LdenSettings) -> Self {
        let mut bounds: Vec<VariableBounds> = archives
            .iter()
            .map(|a| VariableBounds::integer(0.0, (a.len() - 1) as f64))
            .collect();
        bounds.extend(allocation_bounds(schedule));
        Self {
            schedule,
            pop,
            lden,
            cache: EnergyCache::new(archives),
            bounds,
        }
    }
}

pub(crate) fn allocation_bounds(schedule: &FlightSchedule) -> Vec<VariableBounds> {
    let types = schedule.types();
    let mut out = vec![VariableBounds::integer(0.0, 0.0); schedule.routes() * types * 3];
    for k in 0..schedule.routes() {
        for i in 0..types {
            for p in Period::ALL {
                out[allocation_index(types, k, i, p)] = VariableBounds::integer(0.0, schedule.upper_bounds.get(k, i, p) as f64);
            }
        }
    }
    out
}

impl Problem for AllocationProblem<'_> {
    fn bounds(&self) -> &[VariableBounds] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let k = self.schedule.routes();
        let routes: Vec<usize> = x[..k].iter().map(|v| v.round() as usize).collect();
        let counts = counts_from_slice(k, self.schedule.types(), &x[k..]);
        Evaluation {
            f: self.cache.objectives(self.pop, self.lden, &routes, &counts),
            violation: allocation_violation(self.schedule, &counts),
        }
    }

    fn repair(&self, x: &mut [f64]) {
        let k = self.schedule.routes();
        repair_allocation(self.schedule, &mut x[k..]);
    }
}

#[derive(Debug, Clone)]
pub struct Step2Result {
    pub solutions: Vec<AllocationSolution>,
    pub optimization: OptimizationResult,
}

/// Step 2: choose one archived route per SID and allocate flights to them.
pub fn step2_allocate(
    archives: &[RouteArchive],
    schedule: &FlightSchedule,
    pop: &PopulationGrid,
    lden: &LdenSettings,
    cfg: &MoeadConfig,
) -> Result<Step2Result, FrameworkError> {
    step2_allocate_with_observer(archives, schedule, pop, lden, cfg, |_| {})
}

pub fn step2_allocate_with_observer(
    archives: &[RouteArchive],
    schedule: &FlightSchedule,
    pop: &PopulationGrid,
    lden: &LdenSettings,
    cfg: &MoeadConfig,
    observer: impl FnMut(&GenerationReport<'_>),
) -> Result<Step2Result, FrameworkError> {
    schedule.validate()?;
    if archives.len() != schedule.routes() {
        return Err(FrameworkError::InvalidInput(format!(
            "{} route archives for {} SIDs",
            archives.len(),
            schedule.routes()
        )));
    }
    for a in archives {
        if a.is_empty() {
            return Err(FrameworkError::EmptyArchive { sid: a.sid.clone() });
        }
        if !a.geometry.same_as(&pop.geometry) || a.aircraft.len() != schedule.types() {
            return Err(FrameworkError::Noise(crate::noise::NoiseError::GeometryMismatch));
        }
    }
    let problem = AllocationProblem::new(archives, schedule, pop, lden);
    let optimization = optimize_with_observer(&problem, cfg, observer)?;
    let k = schedule.routes();
    let solutions = optimization
        .archive
        .entries()
        .iter()
        .map(|e| AllocationSolution {
            routes: e.x[..k].iter().map(|v| v.round() as usize).collect(),
            counts: counts_from_slice(k, schedule.types(), &e.x[k..]),
            objectives: e.f,
        })
        .collect();
    Ok(Step2Result { solutions, optimization })
}

/// Recomputes `(N_pa, T_fuel)` of an allocation from freshly simulated
/// trajectories rather than the stored grids.
pub fn reevaluate_allocation(
    ctx: &ModelContext,
    sids: &[SidDefinition],
    archives: &[RouteArchive],
    solution: &AllocationSolution,
) -> Result<[f64; 2], FrameworkError> {
    let mut outcomes = Vec::with_capacity(sids.len());
    for ((sid, archive), &r) in sids.iter().zip(archives).zip(&solution.routes) {
        let entry = archive
            .entries
            .get(r)
            .ok_or_else(|| FrameworkError::InvalidInput(format!("route index {r} outside the archive of '{}'", sid.name)))?;
        let route = simulate_route(ctx, sid, archive.mode, &entry.x).map_err(|v| {
            FrameworkError::InvalidInput(format!("route {r} of '{}' fails to simulate (violation {v})", sid.name))
        })?;
        outcomes.push(route_outcome(ctx, &route));
    }
    let grids: Vec<Vec<&SelGrid>> = outcomes.iter().map(|o| o.sel.iter().collect()).collect();
    let npa = people_annoyed(&ctx.population, &grids, &solution.counts, &ctx.lden)?;
    Ok([npa, total_fuel(&solution.counts, |k, i| outcomes[k].fuel[i])])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::schedule::tests::two_routes_one_terminal;
    use crate::framework::step1::RouteEntry;
    use crate::framework::Mode;
    use crate::moead::ParetoArchive;
    use crate::noise::GridGeometry;
    use proptest::prelude::*;

    fn geometry() -> GridGeometry {
        GridGeometry::new(0.0, 0.0, 500.0, 3, 2).unwrap()
    }

    fn entry(sel: [f32; 6], fuel: f64) -> RouteEntry {
        RouteEntry {
            x: vec![],
            objectives: [0.0, 0.0],
            fuel: vec![fuel],
            distance: vec![0.0],
            flight_time: vec![0.0],
            sel: vec![SelGrid {
                geometry: geometry(),
                sel: sel.to_vec(),
            }],
            track: vec![],
            profiles: vec![],
        }
    }

    fn archive(name: &str, entries: Vec<RouteEntry>) -> RouteArchive {
        RouteArchive {
            sid: name.into(),
            mode: Mode::TwoD,
            aircraft: vec!["A".into()],
            design_counts: vec![[4, 0, 0]],
            geometry: geometry(),
            entries,
        }
    }

    fn micro_archives() -> Vec<RouteArchive> {
        vec![
            archive(
                "A",
                vec![
                    entry([92.0, 88.0, 80.0, 70.0, 66.0, 60.0], 900.0),
                    entry([84.0, 85.0, 84.0, 74.0, 70.0, 64.0], 960.0),
                    entry([75.0, 78.0, 86.0, 77.0, 76.0, 70.0], 1040.0),
                ],
            ),
            archive(
                "B",
                vec![
                    entry([60.0, 68.0, 79.0, 82.0, 90.0, 93.0], 880.0),
                    entry([64.0, 71.0, 80.0, 86.0, 85.0, 84.0], 950.0),
                    entry([69.0, 74.0, 79.0, 89.0, 80.0, 76.0], 1010.0),
                ],
            ),
        ]
    }

    fn population() -> PopulationGrid {
        PopulationGrid::new(geometry(), vec![1200.0, 800.0, 300.0, 900.0, 1500.0, 400.0]).unwrap()
    }

    #[test]
    fn micro_instance_matches_exhaustive_enumeration() {
        let archives = micro_archives();
        let schedule = two_routes_one_terminal([4, 0, 0], 10);
        let pop = population();
        let lden = LdenSettings::default();
        let cache = EnergyCache::new(&archives);
        let mut oracle = ParetoArchive::new();
        for r0 in 0..3 {
            for r1 in 0..3 {
                for a0 in 0..=4u32 {
                    let counts = OperationCounts::from_nested(&[vec![[a0, 0, 0]], vec![[4 - a0, 0, 0]]]);
                    let grids: Vec<Vec<&SelGrid>> = vec![vec![&archives[0].entries[r0].sel[0]], vec![&archives[1].entries[r1].sel[0]]];
                    let npa = people_annoyed(&pop, &grids, &counts, &lden).unwrap();
                    let fuel = a0 as f64 * archives[0].entries[r0].fuel[0] + (4 - a0) as f64 * archives[1].entries[r1].fuel[0];
                    assert_eq!(cache.objectives(&pop, &lden, &[r0, r1], &counts), [npa, fuel]);
                    oracle.insert(crate::moead::ArchiveEntry {
                        x: vec![r0 as f64, r1 as f64, a0 as f64],
                        f: [npa, fuel],
                        violation: 0.0,
                    });
                }
            }
        }
        let cfg = MoeadConfig {
            population_size: 30,
            max_iterations: 200,
            neighborhood_size: 6,
            rng_seed: 17,
            ..MoeadConfig::default()
        };
        let r = step2_allocate(&archives, &schedule, &pop, &lden, &cfg).unwrap();
        let got: Vec<[f64; 2]> = r.solutions.iter().map(|s| s.objectives).collect();
        assert_eq!(got, oracle.front());
        for s in &r.solutions {
            s.check(&schedule).unwrap();
        }
    }

    #[test]
    fn single_route_per_terminal_forces_totals() {
        let mut archives = micro_archives();
        archives.truncate(1);
        let schedule = FlightSchedule {
            terminal_points: vec!["FIX".into()],
            route_terminal: vec![0],
            totals: vec![vec![[3, 1, 2]]],
            capacities: vec![10],
            upper_bounds: OperationCounts::from_nested(&[vec![[10, 10, 10]]]),
        };
        let cfg = MoeadConfig {
            population_size: 10,
            max_iterations: 10,
            neighborhood_size: 3,
            ..MoeadConfig::default()
        };
        let r = step2_allocate(&archives, &schedule, &population(), &LdenSettings::default(), &cfg).unwrap();
        for s in &r.solutions {
            assert_eq!((s.counts.get(0, 0, Period::Day), s.counts.get(0, 0, Period::Evening), s.counts.get(0, 0, Period::Night)), (3, 1, 2));
        }
    }

    #[test]
    fn identical_routes_make_split_irrelevant() {
        let mut archives = micro_archives();
        archives[1].entries = archives[0].entries.clone();
        let cache = EnergyCache::new(&archives);
        let pop = population();
        let lden = LdenSettings::default();
        let base = cache.objectives(&pop, &lden, &[1, 1], &OperationCounts::from_nested(&[vec![[4, 0, 0]], vec![[0, 0, 0]]]));
        for a0 in 0..=4 {
            let c = OperationCounts::from_nested(&[vec![[a0, 0, 0]], vec![[4 - a0, 0, 0]]]);
            let o = cache.objectives(&pop, &lden, &[1, 1], &c);
            assert!((o[0] - base[0]).abs() < 1e-9 * base[0] && (o[1] - base[1]).abs() < 1e-9);
        }
    }

    #[test]
    fn night_flights_never_reduce_annoyance() {
        let archives = micro_archives();
        let cache = EnergyCache::new(&archives);
        let pop = population();
        let lden = LdenSettings::default();
        let mut counts = OperationCounts::from_nested(&[vec![[2, 1, 0]], vec![[1, 0, 1]]]);
        let mut last = cache.objectives(&pop, &lden, &[0, 2], &counts)[0];
        for step in 0..6 {
            counts.add(step % 2, 0, Period::Night, 1);
            let now = cache.objectives(&pop, &lden, &[0, 2], &counts)[0];
            assert!(now >= last);
            last = now;
        }
    }

    #[test]
    fn infeasible_schedule_rejected_before_optimizing() {
        let schedule = two_routes_one_terminal([30, 0, 0], 10);
        let err = step2_allocate(&micro_archives(), &schedule, &population(), &LdenSettings::default(), &MoeadConfig::default()).unwrap_err();
        assert!(matches!(err, FrameworkError::InfeasibleSchedule { .. }));
    }

    fn three_route_schedule() -> FlightSchedule {
        FlightSchedule {
            terminal_points: vec!["N".into(), "S".into()],
            route_terminal: vec![0, 0, 1],
            totals: vec![vec![[9, 4, 2], [5, 0, 3]], vec![[6, 2, 1], [2, 2, 2]]],
            capacities: vec![20, 20, 20],
            upper_bounds: OperationCounts::from_nested(&[
                vec![[6, 3, 2], [4, 4, 4]],
                vec![[8, 3, 2], [4, 4, 4]],
                vec![[9, 9, 9], [9, 9, 9]],
            ]),
        }
    }

    proptest! {
        #[test]
        fn repair_satisfies_equalities_and_is_idempotent(raw in prop::collection::vec(0u32..12, 18)) {
            let schedule = three_route_schedule();
            schedule.validate().unwrap();
            let mut a: Vec<f64> = raw.iter().map(|&v| v as f64).collect();
            repair_allocation(&schedule, &mut a);
            let counts = counts_from_slice(3, 2, &a);
            for s in 0..2 {
                for i in 0..2 {
                    for p in Period::ALL {
                        let sum: u32 = schedule.routes_of(s).map(|k| counts.get(k, i, p)).sum();
                        prop_assert_eq!(sum, schedule.total(s, i, p));
                    }
                }
            }
            for k in 0..3 {
                for i in 0..2 {
                    for p in Period::ALL {
                        prop_assert!(counts.get(k, i, p) <= schedule.upper_bounds.get(k, i, p));
                    }
                }
            }
            let mut again = a.clone();
            repair_allocation(&schedule, &mut again);
            prop_assert_eq!(again, a);
        }
    }
}
