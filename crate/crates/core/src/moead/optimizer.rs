use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::archive::{hypervolume_2d, ArchiveEntry, ParetoArchive};
use super::weights::{generate_weights, neighborhoods, tchebycheff};
use super::MoeadError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds {
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub integer: bool,
}

impl VariableBounds {
    pub fn continuous(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            integer: false,
        }
    }

    pub fn integer(lower: f64, upper: f64) -> Self {
        Self {
            lower,
            upper,
            integer: true,
        }
    }
}

/// Objective pair and constraint violation of one decision vector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub f: [f64; 2],
    /// 0 when feasible.
    pub violation: f64,
}

impl Evaluation {
    pub fn feasible(f1: f64, f2: f64) -> Self {
        Self {
            f: [f1, f2],
            violation: 0.0,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.violation == 0.0
    }
}

/// A bi-objective minimization problem. `evaluate` must be pure.
pub trait Problem: Sync {
    fn bounds(&self) -> &[VariableBounds];

    fn evaluate(&self, x: &[f64]) -> Evaluation;

    /// Maps a rounded, in-bounds vector onto the feasible set of hard constraints.
    fn repair(&self, _x: &mut [f64]) {}

    fn dimension(&self) -> usize {
        self.bounds().len()
    }
}

/// Problem built from closures.
pub struct FnProblem<F> {
    pub bounds: Vec<VariableBounds>,
    pub evaluate: F,
}

impl<F: Fn(&[f64]) -> Evaluation + Sync> Problem for FnProblem<F> {
    fn bounds(&self) -> &[VariableBounds] {
        &self.bounds
    }

    fn evaluate(&self, x: &[f64]) -> Evaluation {
        (self.evaluate)(x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoeadConfig {
    pub population_size: usize,
    pub max_iterations: usize,
    pub neighborhood_size: usize,
    pub de_scale: f64,
    pub crossover_rate: f64,
    /// Per-variable polynomial mutation probability; `None` means `1/dimension`.
    pub mutation_rate: Option<f64>,
    pub mutation_distribution_index: f64,
    pub replacement_limit: usize,
    pub neighbor_selection_prob: f64,
    pub rng_seed: u64,
    /// Evaluation workers: 1 evaluates sequentially, 0 uses the global pool.
    pub workers: usize,
    /// Hypervolume reference for the trace; derived from the first feasible population when absent.
    pub hv_reference: Option<[f64; 2]>,
}

impl Default for MoeadConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            max_iterations: 1000,
            neighborhood_size: 10,
            de_scale: 0.5,
            crossover_rate: 0.9,
            mutation_rate: None,
            mutation_distribution_index: 20.0,
            replacement_limit: 2,
            neighbor_selection_prob: 0.9,
            rng_seed: 1,
            workers: 1,
            hv_reference: None,
        }
    }
}

impl MoeadConfig {
    pub fn validate(&self) -> Result<(), MoeadError> {
        let bad = |m: &str| Err(MoeadError::InvalidConfig(m.into()));
        if self.population_size < 2 {
            return bad("population size must be at least 2");
        }
        if self.neighborhood_size < 2 || self.neighborhood_size > self.population_size {
            return bad("neighbourhood size must lie in [2, population size]");
        }
        if !(self.de_scale > 0.0 && self.de_scale.is_finite()) {
            return bad("DE scale factor must be positive");
        }
        let prob = |p: f64| (0.0..=1.0).contains(&p);
        if !prob(self.crossover_rate) || !prob(self.neighbor_selection_prob) || !self.mutation_rate.map_or(true, prob) {
            return bad("probabilities must lie in [0, 1]");
        }
        if !(self.mutation_distribution_index >= 0.0) {
            return bad("mutation distribution index must be non-negative");
        }
        if self.replacement_limit == 0 {
            return bad("replacement limit must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: usize,
    pub hypervolume: f64,
    pub feasible_count: usize,
}

/// Snapshot passed to the observer after each generation (iteration 0 is the initial population).
#[derive(Debug)]
pub struct GenerationReport<'a> {
    pub iteration: usize,
    pub ideal: [f64; 2],
    pub hypervolume: f64,
    pub feasible_count: usize,
    pub archive: &'a ParetoArchive,
    pub evaluations: usize,
    /// Per sub-problem `(violation, Tchebycheff value)` before and after this
    /// generation's replacements, both under this generation's ideal point.
    pub before: &'a [(f64, f64)],
    pub after: &'a [(f64, f64)],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizationResult {
    pub archive: ParetoArchive,
    pub trace: Vec<TracePoint>,
    pub evaluations: usize,
    /// Candidates whose objectives were not finite.
    pub non_finite: usize,
    pub hv_reference: Option<[f64; 2]>,
}

#[derive(Clone)]
struct Individual {
    x: Vec<f64>,
    e: Evaluation,
}

/// Feasibility-first comparison: `a` is strictly better than `b` for a sub-problem.
fn better(a: &Evaluation, b: &Evaluation, w: &[f64; 2], z: &[f64; 2]) -> bool {
    match (a.is_feasible(), b.is_feasible()) {
        (true, false) => true,
        (false, true) => false,
        (false, false) => a.violation < b.violation,
        (true, true) => tchebycheff(&a.f, w, z) < tchebycheff(&b.f, w, z),
    }
}

fn sanitize(e: Evaluation, non_finite: &mut usize) -> Evaluation {
    if e.f.iter().all(|v| v.is_finite()) && e.violation.is_finite() && e.violation >= 0.0 {
        e
    } else {
        *non_finite += 1;
        Evaluation {
            f: [f64::INFINITY; 2],
            violation: f64::MAX,
        }
    }
}

fn evaluate_all<P: Problem + ?Sized>(problem: &P, xs: &[Vec<f64>], pool: Option<&rayon::ThreadPool>, workers: usize) -> Vec<Evaluation> {
    match (workers, pool) {
        (1, _) => xs.iter().map(|x| problem.evaluate(x)).collect(),
        (_, Some(pool)) => pool.install(|| xs.par_iter().map(|x| problem.evaluate(x)).collect()),
        _ => xs.par_iter().map(|x| problem.evaluate(x)).collect(),
    }
}

fn snap_to_bounds(x: &mut [f64], bounds: &[VariableBounds]) {
    for (v, b) in x.iter_mut().zip(bounds) {
        if b.integer {
            *v = v.round();
        }
        *v = v.clamp(b.lower, b.upper);
    }
}

fn polynomial_mutation(v: f64, b: &VariableBounds, eta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let range = b.upper - b.lower;
    if range <= 0.0 {
        return b.lower;
    }
    let d1 = (v - b.lower) / range;
    let d2 = (b.upper - v) / range;
    let u: f64 = rng.gen();
    let p = 1.0 / (eta + 1.0);
    let dq = if u < 0.5 {
        let val = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        val.powf(p) - 1.0
    } else {
        let val = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - val.powf(p)
    };
    (v + dq * range).clamp(b.lower, b.upper)
}

pub fn optimize<P: Problem + ?Sized>(problem: &P, cfg: &MoeadConfig) -> Result<OptimizationResult, MoeadError> {
    optimize_with_observer(problem, cfg, |_| {})
}

/// MOEA/D-DE with Tchebycheff decomposition.
///
/// Each generation builds one child per sub-problem from the population as it
/// stood at the start of the generation, evaluates all children (optionally in
/// parallel), updates the ideal point from feasible children, and then applies
/// replacements serially in sub-problem order.
pub fn optimize_with_observer<P: Problem + ?Sized>(
    problem: &P,
    cfg: &MoeadConfig,
    mut observer: impl FnMut(&GenerationReport<'_>),
) -> Result<OptimizationResult, MoeadError> {
    cfg.validate()?;
    let bounds = problem.bounds();
    let n = bounds.len();
    if n == 0 {
        return Err(MoeadError::InvalidBounds("problem has no variables".into()));
    }
    if let Some(j) = bounds
        .iter()
        .position(|b| !(b.lower.is_finite() && b.upper.is_finite() && b.lower <= b.upper))
    {
        return Err(MoeadError::InvalidBounds(format!("variable {j} has invalid bounds")));
    }
    let pool = if cfg.workers > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| MoeadError::InvalidConfig(e.to_string()))?,
        )
    } else {
        None
    };

    let np = cfg.population_size;
    let weights = generate_weights(np);
    let hoods = neighborhoods(&weights, cfg.neighborhood_size);
    let pm = cfg.mutation_rate.unwrap_or(1.0 / n as f64);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.rng_seed);
    let mut non_finite = 0;
    let mut evaluations = 0;

    let xs: Vec<Vec<f64>> = (0..np)
        .map(|_| {
            let mut x: Vec<f64> = bounds
                .iter()
                .map(|b| if b.upper > b.lower { rng.gen_range(b.lower..=b.upper) } else { b.lower })
                .collect();
            snap_to_bounds(&mut x, bounds);
            problem.repair(&mut x);
            x
        })
        .collect();
    let evals = evaluate_all(problem, &xs, pool.as_ref(), cfg.workers);
    evaluations += np;
    let mut pop: Vec<Individual> = xs
        .into_iter()
        .zip(evals)
        .map(|(x, e)| Individual {
            x,
            e: sanitize(e, &mut non_finite),
        })
        .collect();

    let mut ideal = [f64::INFINITY; 2];
    let mut archive = ParetoArchive::new();
    let absorb = |ideal: &mut [f64; 2], archive: &mut ParetoArchive, ind: &Individual| {
        if ind.e.is_feasible() {
            ideal[0] = ideal[0].min(ind.e.f[0]);
            ideal[1] = ideal[1].min(ind.e.f[1]);
            archive.insert(ArchiveEntry {
                x: ind.x.clone(),
                f: ind.e.f,
                violation: 0.0,
            });
        }
    };
    for ind in &pop {
        absorb(&mut ideal, &mut archive, ind);
    }

    let mut hv_reference = cfg.hv_reference;
    let mut trace = Vec::with_capacity(cfg.max_iterations + 1);
    let keys = |pop: &[Individual], ideal: &[f64; 2]| -> Vec<(f64, f64)> {
        pop.iter()
            .zip(&weights)
            .map(|(ind, w)| {
                let g = if ind.e.is_feasible() { tchebycheff(&ind.e.f, w, ideal) } else { f64::INFINITY };
                (ind.e.violation, g)
            })
            .collect()
    };
    let mut record = |iteration: usize,
                      pop: &[Individual],
                      archive: &ParetoArchive,
                      ideal: [f64; 2],
                      evaluations: usize,
                      before: &[(f64, f64)],
                      after: &[(f64, f64)],
                      hv_reference: &mut Option<[f64; 2]>| {
        let feasible: Vec<&Individual> = pop.iter().filter(|i| i.e.is_feasible()).collect();
        if hv_reference.is_none() && !feasible.is_empty() {
            let worst = |j: usize| feasible.iter().map(|i| i.e.f[j]).fold(f64::NEG_INFINITY, f64::max);
            let best = |j: usize| feasible.iter().map(|i| i.e.f[j]).fold(f64::INFINITY, f64::min);
            *hv_reference = Some([0, 1].map(|j| {
                let span = (worst(j) - best(j)).max(worst(j).abs() * 1e-6).max(1e-12);
                worst(j) + 0.1 * span
            }));
        }
        let hypervolume = hv_reference.map_or(0.0, |r| hypervolume_2d(&archive.front(), r));
        let point = TracePoint {
            iteration,
            hypervolume,
            feasible_count: feasible.len(),
        };
        observer(&GenerationReport {
            iteration,
            ideal,
            hypervolume,
            feasible_count: point.feasible_count,
            archive,
            evaluations,
            before,
            after,
        });
        point
    };
    let initial_keys = keys(&pop, &ideal);
    trace.push(record(0, &pop, &archive, ideal, evaluations, &initial_keys, &initial_keys, &mut hv_reference));

    let mut order: Vec<usize> = Vec::with_capacity(np);
    for iteration in 1..=cfg.max_iterations {
        // Variation from the generation-start population.
        let mut pools: Vec<bool> = Vec::with_capacity(np);
        let children: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let local = rng.gen::<f64>() < cfg.neighbor_selection_prob;
                pools.push(local);
                let pick = |rng: &mut ChaCha8Rng| {
                    if local {
                        hoods[i][rng.gen_range(0..hoods[i].len())]
                    } else {
                        rng.gen_range(0..np)
                    }
                };
                let r1 = pick(&mut rng);
                let mut r2 = pick(&mut rng);
                for _ in 0..8 {
                    if r2 != r1 {
                        break;
                    }
                    r2 = pick(&mut rng);
                }
                let jrand = rng.gen_range(0..n);
                let mut y = pop[i].x.clone();
                for j in 0..n {
                    if j == jrand || rng.gen::<f64>() < cfg.crossover_rate {
                        y[j] = pop[i].x[j] + cfg.de_scale * (pop[r1].x[j] - pop[r2].x[j]);
                    }
                    let b = &bounds[j];
                    if y[j] < b.lower || y[j] > b.upper {
                        y[j] = if b.upper > b.lower { rng.gen_range(b.lower..=b.upper) } else { b.lower };
                    }
                    if rng.gen::<f64>() < pm {
                        y[j] = polynomial_mutation(y[j], b, cfg.mutation_distribution_index, &mut rng);
                    }
                }
                snap_to_bounds(&mut y, bounds);
                problem.repair(&mut y);
                y
            })
            .collect();
        let evals = evaluate_all(problem, &children, pool.as_ref(), cfg.workers);
        evaluations += np;
        let children: Vec<Individual> = children
            .into_iter()
            .zip(evals)
            .map(|(x, e)| Individual {
                x,
                e: sanitize(e, &mut non_finite),
            })
            .collect();
        for c in &children {
            absorb(&mut ideal, &mut archive, c);
        }

        let before = keys(&pop, &ideal);
        for (i, child) in children.iter().enumerate() {
            order.clear();
            if pools[i] {
                order.extend_from_slice(&hoods[i]);
            } else {
                order.extend(0..np);
            }
            // Fisher–Yates with the optimizer's stream keeps runs reproducible.
            for a in (1..order.len()).rev() {
                let b = rng.gen_range(0..=a);
                order.swap(a, b);
            }
            let mut replaced = 0;
            for &j in &order {
                if replaced >= cfg.replacement_limit {
                    break;
                }
                if better(&child.e, &pop[j].e, &weights[j], &ideal) {
                    pop[j] = child.clone();
                    replaced += 1;
                }
            }
        }
        let after = keys(&pop, &ideal);
        trace.push(record(iteration, &pop, &archive, ideal, evaluations, &before, &after, &mut hv_reference));
    }

    Ok(OptimizationResult {
        archive,
        trace,
        evaluations,
        non_finite,
        hv_reference,
    })
}

/// Writes the hypervolume trace as CSV.
pub fn write_trace_csv<W: std::io::Write>(trace: &[TracePoint], out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["iteration", "hypervolume", "feasible_count"])?;
    for p in trace {
        w.write_record([p.iteration.to_string(), format!("{:.17e}", p.hypervolume), p.feasible_count.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moead::archive::dominates;

    fn schaffer() -> FnProblem<impl Fn(&[f64]) -> Evaluation + Sync> {
        FnProblem {
            bounds: vec![VariableBounds::continuous(-5.0, 10.0)],
            evaluate: |x: &[f64]| Evaluation::feasible(x[0] * x[0], (x[0] - 2.0).powi(2)),
        }
    }

    fn small(seed: u64) -> MoeadConfig {
        MoeadConfig {
            population_size: 30,
            max_iterations: 60,
            rng_seed: seed,
            ..MoeadConfig::default()
        }
    }

    #[test]
    fn schaffer_front_is_reached() {
        let r = optimize(&schaffer(), &small(3)).unwrap();
        let exact = 625.0 - 8.0 / 3.0;
        let hv = hypervolume_2d(&r.archive.front(), [25.0, 25.0]);
        assert!(hv >= 0.99 * exact, "{hv}");
        assert!(r.archive.entries().iter().all(|e| (-1e-3..=2.0 + 1e-3).contains(&e.x[0])));
        assert_eq!(r.evaluations, 30 * 61);
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let a = optimize(&schaffer(), &small(7)).unwrap();
        let b = optimize(&schaffer(), &small(7)).unwrap();
        assert_eq!(a, b);
        let c = optimize(&schaffer(), &small(8)).unwrap();
        assert_ne!(a.archive, c.archive);
    }

    #[test]
    fn parallel_evaluation_matches_sequential() {
        let seq = optimize(&schaffer(), &small(11)).unwrap();
        let par = optimize(&schaffer(), &MoeadConfig { workers: 3, ..small(11) }).unwrap();
        let global = optimize(&schaffer(), &MoeadConfig { workers: 0, ..small(11) }).unwrap();
        assert_eq!(seq, par);
        assert_eq!(seq, global);
    }

    #[test]
    fn constrained_toy_keeps_only_feasible_points() {
        let p = FnProblem {
            bounds: vec![VariableBounds::continuous(0.0, 1.0); 2],
            evaluate: |x: &[f64]| Evaluation {
                f: [x[0], 1.0 - x[0] + x[1]],
                violation: (x[0] - x[1]).max(0.0),
            },
        };
        let r = optimize(&p, &small(5)).unwrap();
        assert!(!r.archive.is_empty());
        assert!(r.archive.entries().iter().all(|e| e.x[0] <= e.x[1]));
    }

    #[test]
    fn generation_invariants_hold() {
        let p = FnProblem {
            bounds: vec![VariableBounds::continuous(0.0, 1.0); 3],
            evaluate: |x: &[f64]| {
                let g = 1.0 + 9.0 * (x[1] + x[2]) / 2.0;
                Evaluation::feasible(x[0], g * (1.0 - (x[0] / g).sqrt()))
            },
        };
        let mut last_ideal = [f64::INFINITY; 2];
        let mut last_hv = 0.0;
        optimize_with_observer(&p, &small(13), |rep| {
            assert!(rep.ideal[0] <= last_ideal[0] && rep.ideal[1] <= last_ideal[1]);
            last_ideal = rep.ideal;
            assert!(rep.hypervolume >= last_hv);
            last_hv = rep.hypervolume;
            let e = rep.archive.entries();
            for a in e {
                assert!(e.iter().all(|b| !dominates(&a.f, &b.f)));
            }
            for (b, a) in rep.before.iter().zip(rep.after) {
                assert!(a.0 < b.0 || (a.0 == b.0 && a.1 <= b.1));
            }
        })
        .unwrap();
    }

    #[test]
    fn integer_variables_and_repair_are_respected() {
        struct Counts;
        impl Problem for Counts {
            fn bounds(&self) -> &[VariableBounds] {
                static B: [VariableBounds; 2] = [
                    VariableBounds { lower: 0.0, upper: 10.0, integer: true },
                    VariableBounds { lower: 0.0, upper: 10.0, integer: true },
                ];
                &B
            }
            fn evaluate(&self, x: &[f64]) -> Evaluation {
                Evaluation::feasible(x[0], 10.0 - x[0] + 0.1 * x[1])
            }
            fn repair(&self, x: &mut [f64]) {
                x[1] = 10.0 - x[0];
            }
        }
        let r = optimize(&Counts, &small(2)).unwrap();
        for e in r.archive.entries() {
            assert!(e.x.iter().all(|v| v.fract() == 0.0));
            assert_eq!(e.x[0] + e.x[1], 10.0);
        }
    }

    #[test]
    fn non_finite_objectives_are_infeasible() {
        let p = FnProblem {
            bounds: vec![VariableBounds::continuous(-1.0, 1.0)],
            evaluate: |x: &[f64]| {
                if x[0] < 0.0 {
                    Evaluation::feasible(f64::NAN, 0.0)
                } else {
                    Evaluation::feasible(x[0], 1.0 - x[0])
                }
            },
        };
        let r = optimize(&p, &small(4)).unwrap();
        assert!(r.non_finite > 0);
        assert!(r.archive.entries().iter().all(|e| e.x[0] >= 0.0));
    }

    #[test]
    fn trace_csv_has_header_and_rows() {
        let r = optimize(&schaffer(), &MoeadConfig { max_iterations: 3, ..small(1) }).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&r.trace, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iteration,hypervolume,feasible_count\n"));
        assert_eq!(text.lines().count(), 5);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = MoeadConfig {
            neighborhood_size: 100,
            ..MoeadConfig::default()
        };
        assert!(optimize(&schaffer(), &cfg).is_err());
    }
}
