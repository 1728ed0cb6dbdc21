use serde::{Deserialize, Serialize};

use super::route::route_objectives;
use super::step1::step1_design_routes;
use super::{FrameworkError, Mode, ModelContext, RouteArchive};
use crate::moead::MoeadConfig;
use crate::trajectory::SidDefinition;

/// Relative ε used for containment: a share of each objective's range in the reference archive.
pub const CONTAINMENT_TOLERANCE: f64 = 0.005;

/// Step-1 archives designed under several flight counts and how well each
/// front is covered by the others.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub counts: Vec<Vec<[u32; 3]>>,
    pub archives: Vec<RouteArchive>,
    /// `matrix[a][b]`: share of archive `a`, re-scored under counts `b`,
    /// that archive `b` ε-dominates.
    pub matrix: Vec<Vec<f64>>,
    /// Index of the count with the most flights.
    pub largest: usize,
}

impl SensitivityReport {
    /// Containment of each archive in the largest-count archive.
    pub fn against_largest(&self) -> Vec<f64> {
        self.matrix.iter().map(|row| row[self.largest]).collect()
    }
}

/// Share of `points` for which some `q` in `reference` satisfies `q ≤ p + eps`.
/// An empty `points` set is fully contained.
pub fn containment(points: &[[f64; 2]], reference: &[[f64; 2]], eps: [f64; 2]) -> f64 {
    if points.is_empty() {
        return 1.0;
    }
    let covered = points
        .iter()
        .filter(|p| reference.iter().any(|q| q[0] <= p[0] + eps[0] && q[1] <= p[1] + eps[1]))
        .count();
    covered as f64 / points.len() as f64
}

/// Objectives of every archived route when flown by `counts`, from the stored grids.
pub fn reevaluate_archive(ctx: &ModelContext, archive: &RouteArchive, counts: &[[u32; 3]]) -> Vec<[f64; 2]> {
    archive
        .entries
        .iter()
        .map(|e| route_objectives(ctx, &e.outcome(), counts))
        .collect()
}

/// Pairwise containment of archives designed under different counts.
pub fn containment_matrix(ctx: &ModelContext, archives: &[RouteArchive], counts: &[Vec<[u32; 3]>]) -> Vec<Vec<f64>> {
    let n = archives.len();
    let mut m = vec![vec![1.0; n]; n];
    for b in 0..n {
        let reference = archives[b].front();
        let eps = [0, 1].map(|j| {
            let (lo, hi) = reference
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p[j]), hi.max(p[j])));
            if reference.is_empty() { 0.0 } else { CONTAINMENT_TOLERANCE * (hi - lo) }
        });
        for a in 0..n {
            if a != b {
                m[a][b] = containment(&reevaluate_archive(ctx, &archives[a], &counts[b]), &reference, eps);
            }
        }
    }
    m
}

/// Runs Step 1 once per assumed count and compares the resulting fronts.
pub fn sensitivity_flight_counts(
    ctx: &ModelContext,
    sid: &SidDefinition,
    counts_list: &[Vec<[u32; 3]>],
    mode: Mode,
    cfg: &MoeadConfig,
) -> Result<SensitivityReport, FrameworkError> {
    sensitivity_flight_counts_with_progress(ctx, sid, counts_list, mode, cfg, |_| {})
}

pub fn sensitivity_flight_counts_with_progress(
    ctx: &ModelContext,
    sid: &SidDefinition,
    counts_list: &[Vec<[u32; 3]>],
    mode: Mode,
    cfg: &MoeadConfig,
    mut progress: impl FnMut(usize),
) -> Result<SensitivityReport, FrameworkError> {
    if counts_list.is_empty() {
        return Err(FrameworkError::InvalidInput("no flight counts given".into()));
    }
    let mut archives = Vec::with_capacity(counts_list.len());
    for (n, counts) in counts_list.iter().enumerate() {
        progress(n);
        archives.push(step1_design_routes(ctx, sid, counts, mode, cfg)?.archive);
    }
    let total = |c: &Vec<[u32; 3]>| c.iter().flatten().map(|&v| v as u64).sum::<u64>();
    let largest = (0..counts_list.len()).max_by_key(|&n| (total(&counts_list[n]), n)).unwrap_or(0);
    Ok(SensitivityReport {
        matrix: containment_matrix(ctx, &archives, counts_list),
        counts: counts_list.to_vec(),
        archives,
        largest,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::tests::{micro_context, micro_sids};
    use proptest::prelude::*;

    #[test]
    fn containment_counts_tolerant_dominance() {
        let reference = [[1.0, 5.0], [3.0, 2.0]];
        assert_eq!(containment(&[[1.0, 5.0], [3.0, 2.0]], &reference, [0.0, 0.0]), 1.0);
        assert_eq!(containment(&[[0.5, 5.0]], &reference, [0.0, 0.0]), 0.0);
        assert_eq!(containment(&[[0.5, 5.0]], &reference, [0.5, 0.0]), 1.0);
        assert_eq!(containment(&[[2.0, 1.0], [4.0, 4.0]], &reference, [0.0, 0.0]), 0.5);
        assert_eq!(containment(&[], &reference, [0.0, 0.0]), 1.0);
    }

    #[test]
    fn single_count_is_trivially_contained() {
        let ctx = micro_context();
        let cfg = MoeadConfig {
            population_size: 8,
            max_iterations: 5,
            neighborhood_size: 3,
            ..MoeadConfig::default()
        };
        let r = sensitivity_flight_counts(&ctx, &micro_sids()[0], &[vec![[20, 2, 3]]], Mode::TwoD, &cfg).unwrap();
        assert_eq!(r.matrix, vec![vec![1.0]]);
        assert_eq!(r.against_largest(), vec![1.0]);
    }

    #[test]
    fn matrix_is_bounded_with_unit_diagonal() {
        let ctx = micro_context();
        let cfg = MoeadConfig {
            population_size: 8,
            max_iterations: 6,
            neighborhood_size: 3,
            ..MoeadConfig::default()
        };
        let counts = vec![vec![[8, 1, 1]], vec![[24, 3, 3]]];
        let r = sensitivity_flight_counts(&ctx, &micro_sids()[0], &counts, Mode::TwoD, &cfg).unwrap();
        assert_eq!(r.largest, 1);
        for (a, row) in r.matrix.iter().enumerate() {
            assert_eq!(row[a], 1.0);
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    proptest! {
        #[test]
        fn containment_is_a_fraction(
            pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..20),
            refs in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 0..20),
            eps in 0.0f64..2.0,
        ) {
            let p: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let q: Vec<[f64; 2]> = refs.iter().map(|&(a, b)| [a, b]).collect();
            let c = containment(&p, &q, [eps, eps]);
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert_eq!(containment(&p, &p, [0.0, 0.0]), 1.0);
        }
    }
}
