use serde::{Deserialize, Serialize};

/// Objective-space tolerance below which two points count as duplicates.
pub const DUPLICATE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchiveEntry {
    pub x: Vec<f64>,
    pub f: [f64; 2],
    pub violation: f64,
}

/// `a` Pareto-dominates `b` (minimization).
pub fn dominates(a: &[f64; 2], b: &[f64; 2]) -> bool {
    a[0] <= b[0] && a[1] <= b[1] && (a[0] < b[0] || a[1] < b[1])
}

fn duplicate(a: &[f64; 2], b: &[f64; 2]) -> bool {
    (a[0] - b[0]).abs() <= DUPLICATE_TOLERANCE && (a[1] - b[1]).abs() <= DUPLICATE_TOLERANCE
}

/// Mutually non-dominated feasible points, kept sorted by the first objective.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParetoArchive {
    entries: Vec<ArchiveEntry>,
}

impl ParetoArchive {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a candidate; returns whether it entered the archive.
    pub fn insert(&mut self, entry: ArchiveEntry) -> bool {
        if entry.violation != 0.0 || !entry.f.iter().all(|v| v.is_finite()) {
            return false;
        }
        if self
            .entries
            .iter()
            .any(|e| dominates(&e.f, &entry.f) || duplicate(&e.f, &entry.f))
        {
            return false;
        }
        self.entries.retain(|e| !dominates(&entry.f, &e.f));
        let pos = self
            .entries
            .partition_point(|e| (e.f[0], e.f[1]) < (entry.f[0], entry.f[1]));
        self.entries.insert(pos, entry);
        true
    }

    pub fn entries(&self) -> &[ArchiveEntry] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<ArchiveEntry> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn front(&self) -> Vec<[f64; 2]> {
        self.entries.iter().map(|e| e.f).collect()
    }

    /// Keeps the entries for which `keep` returns true.
    pub fn retain(&mut self, mut keep: impl FnMut(&ArchiveEntry) -> bool) {
        self.entries.retain(|e| keep(e));
    }
}

impl FromIterator<ArchiveEntry> for ParetoArchive {
    fn from_iter<I: IntoIterator<Item = ArchiveEntry>>(iter: I) -> Self {
        let mut a = Self::new();
        for e in iter {
            a.insert(e);
        }
        a
    }
}

/// Exact 2-D hypervolume dominated by `front` relative to `reference`.
pub fn hypervolume_2d(front: &[[f64; 2]], reference: [f64; 2]) -> f64 {
    hypervolume_2d_counted(front, reference).0
}

/// As [`hypervolume_2d`], also returning how many points were excluded for
/// not strictly dominating the reference.
pub fn hypervolume_2d_counted(front: &[[f64; 2]], reference: [f64; 2]) -> (f64, usize) {
    let mut pts: Vec<[f64; 2]> = front
        .iter()
        .copied()
        .filter(|p| p[0] < reference[0] && p[1] < reference[1])
        .collect();
    let excluded = front.len() - pts.len();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut hv = 0.0;
    let mut ceiling = reference[1];
    for p in pts {
        if p[1] < ceiling {
            hv += (reference[0] - p[0]) * (ceiling - p[1]);
            ceiling = p[1];
        }
    }
    (hv, excluded)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entry(f1: f64, f2: f64) -> ArchiveEntry {
        ArchiveEntry {
            x: vec![f1],
            f: [f1, f2],
            violation: 0.0,
        }
    }

    #[test]
    fn hypervolume_basics() {
        assert_eq!(hypervolume_2d(&[[0.0, 0.0]], [1.0, 1.0]), 1.0);
        assert_eq!(hypervolume_2d(&[[0.0, 0.5], [0.5, 0.0]], [1.0, 1.0]), 0.75);
        assert_eq!(hypervolume_2d(&[[0.0, 0.5], [0.5, 0.0], [0.0, 0.5]], [1.0, 1.0]), 0.75);
        let (hv, excluded) = hypervolume_2d_counted(&[[0.5, 0.5], [2.0, 0.0]], [1.0, 1.0]);
        assert_eq!((hv, excluded), (0.25, 1));
    }

    #[test]
    fn archive_rejects_dominated_infeasible_and_duplicates() {
        let mut a = ParetoArchive::new();
        assert!(a.insert(entry(1.0, 1.0)));
        assert!(!a.insert(entry(2.0, 2.0)));
        assert!(!a.insert(entry(1.0, 1.0 + 1e-13)));
        assert!(!a.insert(ArchiveEntry {
            violation: 0.5,
            ..entry(0.0, 0.0)
        }));
        assert!(a.insert(entry(0.5, 2.0)));
        assert!(a.insert(entry(0.0, 0.0)));
        assert_eq!(a.len(), 1);
    }

    proptest! {
        #[test]
        fn archive_stays_non_dominated_and_sorted(pts in prop::collection::vec((0.0f64..10.0, 0.0f64..10.0), 1..80)) {
            let a: ParetoArchive = pts.iter().map(|&(x, y)| entry(x, y)).collect();
            let e = a.entries();
            for i in 0..e.len() {
                for j in 0..e.len() {
                    prop_assert!(i == j || !dominates(&e[i].f, &e[j].f));
                }
            }
            prop_assert!(e.windows(2).all(|w| w[0].f[0] <= w[1].f[0]));
            // Every input is dominated by or equal to some archive point.
            for &(x, y) in &pts {
                prop_assert!(e.iter().any(|q| q.f[0] <= x + 1e-12 && q.f[1] <= y + 1e-12));
            }
        }

        #[test]
        fn hypervolume_is_monotone_under_insertion(pts in prop::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40), extra in (0.0f64..1.0, 0.0f64..1.0)) {
            let front: Vec<[f64; 2]> = pts.iter().map(|&(a, b)| [a, b]).collect();
            let mut more = front.clone();
            more.push([extra.0, extra.1]);
            prop_assert!(hypervolume_2d(&more, [1.0, 1.0]) >= hypervolume_2d(&front, [1.0, 1.0]) - 1e-15);
        }
    }
}
