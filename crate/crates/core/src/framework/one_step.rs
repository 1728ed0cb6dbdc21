use serde::{Deserialize, Serialize};

use super::route::{route_bounds, route_dimension, route_outcome, simulate_route, RouteOutcome};
use super::step2::{allocation_bounds, allocation_violation, counts_from_slice, repair_allocation, total_fuel};
use super::{FlightSchedule, FrameworkError, Mode, ModelContext};
use crate::moead::{optimize_with_observer, Evaluation, GenerationReport, MoeadConfig, OptimizationResult, Problem, VariableBounds};
use crate::noise::{people_annoyed, OperationCounts, SelGrid};
use crate::trajectory::SidDefinition;

/// Number of decision variables: every route's design vector followed by the allocation.
pub fn one_step_dimension(sids: usize, types: usize, mode: Mode) -> usize {
    sids * route_dimension(mode, types) + sids * types * 3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OneStepSolution {
    /// Route decision vector per SID.
    pub routes: Vec<Vec<f64>>,
    pub counts: OperationCounts,
    /// `(N_pa, T_fuel)`
    pub objectives: [f64; 2],
}

struct OneStepProblem<'a> {
    ctx: &'a ModelContext,
    sids: &'a [SidDefinition],
    schedule: &'a FlightSchedule,
    mode: Mode,
    route_dim: usize,
    bounds: Vec<VariableBounds>,
}

impl<'a> OneStepProblem<'a> {
    fn new(ctx: &'a ModelContext, sids: &'a [SidDefinition], schedule: &'a FlightSchedule, mode: Mode) -> Self {
        let types = ctx.fleet.len();
        let mut bounds: Vec<VariableBounds> = sids
            .iter()
            .flat_map(|s| route_bounds(s, mode, types, ctx.segment_gamma_max))
            .collect();
        bounds.extend(allocation_bounds(schedule));
        Self {
            ctx,
            sids,
            schedule,
            mode,
            route_dim: route_dimension(mode, types),
            bounds,
        }
    }

    fn split<'x>(&self, x: &'x [f64]) -> (Vec<&'x [f64]>, &'x [f64]) {
        let (routes, alloc) = x.split_at(self.sids.len() * self.route_dim);
        (routes.chunks(self.route_dim).collect(), alloc)
    }
}

impl Problem for OneStepProblem<'_> {
    fn bounds(&self) -> &[VariableBounds] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        let (route_x, alloc) = self.split(x);
        let counts = counts_from_slice(self.sids.len(), self.ctx.fleet.len(), alloc);
        let mut violation = allocation_violation(self.schedule, &counts);
        let mut outcomes: Vec<RouteOutcome> = Vec::with_capacity(self.sids.len());
        for (sid, rx) in self.sids.iter().zip(route_x) {
            match simulate_route(self.ctx, sid, self.mode, rx) {
                Ok(r) if r.bank_violation > 0.0 => violation += r.bank_violation,
                Ok(r) => outcomes.push(route_outcome(self.ctx, &r)),
                Err(v) => violation += v,
            }
        }
        if violation > 0.0 {
            return Evaluation { f: [0.0, 0.0], violation };
        }
        let grids: Vec<Vec<&SelGrid>> = outcomes.iter().map(|o| o.sel.iter().collect()).collect();
        let npa = people_annoyed(&self.ctx.population, &grids, &counts, &self.ctx.lden).expect("route grids share the population geometry");
        Evaluation::feasible_pair([npa, total_fuel(&counts, |k, i| outcomes[k].fuel[i])])
    }

    fn repair(&self, x: &mut [f64]) {
        let at = self.sids.len() * self.route_dim;
        repair_allocation(self.schedule, &mut x[at..]);
    }
}

#[derive(Debug, Clone)]
pub struct OneStepResult {
    pub solutions: Vec<OneStepSolution>,
    pub optimization: OptimizationResult,
}

/// Optimizes all routes and the allocation as a single problem.
pub fn one_step_optimize(
    ctx: &ModelContext,
    sids: &[SidDefinition],
    schedule: &FlightSchedule,
    mode: Mode,
    cfg: &MoeadConfig,
) -> Result<OneStepResult, FrameworkError> {
    one_step_optimize_with_observer(ctx, sids, schedule, mode, cfg, |_| {})
}

pub fn one_step_optimize_with_observer(
    ctx: &ModelContext,
    sids: &[SidDefinition],
    schedule: &FlightSchedule,
    mode: Mode,
    cfg: &MoeadConfig,
    observer: impl FnMut(&GenerationReport<'_>),
) -> Result<OneStepResult, FrameworkError> {
    schedule.validate()?;
    if sids.len() != schedule.routes() || ctx.fleet.len() != schedule.types() {
        return Err(FrameworkError::InvalidInput(format!(
            "schedule covers {} routes and {} types, scenario has {} SIDs and {} types",
            schedule.routes(),
            schedule.types(),
            sids.len(),
            ctx.fleet.len()
        )));
    }
    for sid in sids {
        sid.validate()?;
    }
    let problem = OneStepProblem::new(ctx, sids, schedule, mode);
    let optimization = optimize_with_observer(&problem, cfg, observer)?;
    let solutions = optimization
        .archive
        .entries()
        .iter()
        .map(|e| {
            let (routes, alloc) = problem.split(&e.x);
            OneStepSolution {
                routes: routes.into_iter().map(<[f64]>::to_vec).collect(),
                counts: counts_from_slice(sids.len(), ctx.fleet.len(), alloc),
                objectives: e.f,
            }
        })
        .collect();
    Ok(OneStepResult { solutions, optimization })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::schedule::tests::two_routes_one_terminal;
    use crate::framework::tests::{micro_context, micro_sids};

    #[test]
    fn variable_count_follows_routes_types_and_mode() {
        assert_eq!(one_step_dimension(2, 1, Mode::TwoD), 16);
        assert_eq!(one_step_dimension(4, 2, Mode::TwoD), 44);
        assert_eq!(one_step_dimension(4, 2, Mode::ThreeD), 4 * (5 + 2 * 18) + 24);
        let ctx = micro_context();
        let sids = micro_sids();
        let schedule = two_routes_one_terminal([10, 2, 2], 20);
        let p = OneStepProblem::new(&ctx, &sids, &schedule, Mode::TwoD);
        assert_eq!(p.dimension(), 16);
    }

    #[test]
    fn solutions_satisfy_schedule() {
        let ctx = micro_context();
        let sids = micro_sids();
        let schedule = two_routes_one_terminal([10, 2, 2], 12);
        let cfg = MoeadConfig {
            population_size: 10,
            max_iterations: 8,
            neighborhood_size: 3,
            ..MoeadConfig::default()
        };
        let r = one_step_optimize(&ctx, &sids, &schedule, Mode::TwoD, &cfg).unwrap();
        assert!(!r.solutions.is_empty());
        for s in &r.solutions {
            assert_eq!(allocation_violation(&schedule, &s.counts), 0.0);
            assert_eq!(s.routes.len(), 2);
        }
    }
}
