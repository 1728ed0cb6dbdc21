use serde::{Deserialize, Serialize};

use super::{GridGeometry, SelGrid};
use crate::airframe::AircraftType;
use crate::trajectory::Trajectory;

/// Settings of the single-event noise model beyond the NPD table itself.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSettings {
    /// TAS at which the NPD table applies without duration correction, m/s.
    pub reference_speed: f64,
    /// Bound on the magnitude of the speed/duration correction, dB.
    pub speed_correction_limit_db: f64,
}

impl Default for NoiseSettings {
    fn default() -> Self {
        Self {
            reference_speed: crate::units::kt(160.0),
            speed_correction_limit_db: 5.0,
        }
    }
}

impl NoiseSettings {
    pub fn speed_correction(&self, v_tas: f64) -> f64 {
        let lim = self.speed_correction_limit_db;
        (-10.0 * (v_tas.max(1e-6) / self.reference_speed).log10()).clamp(-lim, lim)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelField {
    pub grid: SelGrid,
    /// Cells whose slant distance fell below the NPD table and was clamped.
    pub clamped_cells: usize,
}

/// Point of closest approach of a trajectory to a ground location.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosestApproach {
    pub segment: usize,
    /// Position along the segment, 0..=1.
    pub fraction: f64,
    pub slant_distance: f64,
    /// Horizontal distance from the observer to the ground projection of the closest point.
    pub lateral_distance: f64,
    pub altitude: f64,
    pub thrust: f64,
    pub v_tas: f64,
}

const CHUNK: usize = 32;

struct Segment {
    ax: f64,
    ay: f64,
    az: f64,
    dx: f64,
    dy: f64,
    dz: f64,
    inv_len2: f64,
}

struct Chunk {
    start: usize,
    end: usize,
    min: [f64; 3],
    max: [f64; 3],
}

/// Segments between consecutive trajectory samples, grouped for bounding-box culling.
struct SegmentIndex<'a> {
    traj: &'a Trajectory,
    segments: Vec<Segment>,
    chunks: Vec<Chunk>,
}

impl<'a> SegmentIndex<'a> {
    fn new(traj: &'a Trajectory) -> Self {
        let s = &traj.samples;
        let segments: Vec<Segment> = if s.len() == 1 {
            vec![Segment {
                ax: s[0].x,
                ay: s[0].y,
                az: s[0].h,
                dx: 0.0,
                dy: 0.0,
                dz: 0.0,
                inv_len2: 0.0,
            }]
        } else {
            s.windows(2)
                .map(|w| {
                    let (dx, dy, dz) = (w[1].x - w[0].x, w[1].y - w[0].y, w[1].h - w[0].h);
                    let len2 = dx * dx + dy * dy + dz * dz;
                    Segment {
                        ax: w[0].x,
                        ay: w[0].y,
                        az: w[0].h,
                        dx,
                        dy,
                        dz,
                        inv_len2: if len2 > 0.0 { 1.0 / len2 } else { 0.0 },
                    }
                })
                .collect()
        };
        let chunks = (0..segments.len())
            .step_by(CHUNK)
            .map(|start| {
                let end = (start + CHUNK).min(segments.len());
                let mut min = [f64::INFINITY; 3];
                let mut max = [f64::NEG_INFINITY; 3];
                for seg in &segments[start..end] {
                    let a = [seg.ax, seg.ay, seg.az];
                    let b = [seg.ax + seg.dx, seg.ay + seg.dy, seg.az + seg.dz];
                    for axis in 0..3 {
                        min[axis] = min[axis].min(a[axis]).min(b[axis]);
                        max[axis] = max[axis].max(a[axis]).max(b[axis]);
                    }
                }
                Chunk { start, end, min, max }
            })
            .collect();
        Self { traj, segments, chunks }
    }

    #[inline]
    fn distance2(seg: &Segment, qx: f64, qy: f64) -> (f64, f64) {
        let (px, py, pz) = (qx - seg.ax, qy - seg.ay, -seg.az);
        let u = ((px * seg.dx + py * seg.dy + pz * seg.dz) * seg.inv_len2).clamp(0.0, 1.0);
        let (ex, ey, ez) = (px - u * seg.dx, py - u * seg.dy, pz - u * seg.dz);
        (ex * ex + ey * ey + ez * ez, u)
    }

    /// Closest segment to the ground point, seeded with a guess to tighten culling.
    fn closest(&self, qx: f64, qy: f64, guess: usize) -> (usize, f64, f64) {
        let (mut best_d2, mut best_u) = Self::distance2(&self.segments[guess], qx, qy);
        let mut best = guess;
        for chunk in &self.chunks {
            let ddx = (chunk.min[0] - qx).max(qx - chunk.max[0]).max(0.0);
            let ddy = (chunk.min[1] - qy).max(qy - chunk.max[1]).max(0.0);
            let ddz = chunk.min[2].max(0.0);
            if ddx * ddx + ddy * ddy + ddz * ddz > best_d2 {
                continue;
            }
            for j in chunk.start..chunk.end {
                let (d2, u) = Self::distance2(&self.segments[j], qx, qy);
                if d2 < best_d2 || (d2 == best_d2 && j < best) {
                    best_d2 = d2;
                    best_u = u;
                    best = j;
                }
            }
        }
        (best, best_u, best_d2)
    }

    fn approach(&self, qx: f64, qy: f64, guess: usize) -> ClosestApproach {
        let (j, u, d2) = self.closest(qx, qy, guess);
        describe(self.traj, j, u, d2.sqrt(), qx, qy)
    }
}

fn describe(traj: &Trajectory, segment: usize, u: f64, slant: f64, qx: f64, qy: f64) -> ClosestApproach {
    let s = &traj.samples;
    let a = &s[segment];
    let b = s.get(segment + 1).unwrap_or(a);
    let lerp = |p: f64, q: f64| p + u * (q - p);
    let (gx, gy) = (lerp(a.x, b.x), lerp(a.y, b.y));
    ClosestApproach {
        segment,
        fraction: u,
        slant_distance: slant,
        lateral_distance: ((gx - qx).powi(2) + (gy - qy).powi(2)).sqrt(),
        altitude: lerp(a.h, b.h),
        thrust: lerp(a.thrust, b.thrust),
        v_tas: lerp(a.v_tas, b.v_tas),
    }
}

/// SEL at the observer for a given closest approach.
pub fn sel_at_approach(ac: &AircraftType, settings: &NoiseSettings, ca: &ClosestApproach) -> (f64, bool) {
    sel_with_table(&ac.npd_table.prepared(), settings, ca)
}

fn sel_with_table(npd: &super::npd::PreparedNpd<'_>, settings: &NoiseSettings, ca: &ClosestApproach) -> (f64, bool) {
    let look = npd.lookup(ca.thrust, ca.slant_distance);
    let beta_deg = ca.altitude.max(0.0).atan2(ca.lateral_distance).to_degrees();
    let lateral = npd.lateral().attenuation(beta_deg, ca.lateral_distance);
    (look.sel - lateral + settings.speed_correction(ca.v_tas), look.clamped)
}

/// Single-event SEL of `traj` at every cell centre of `geometry`.
///
/// For each cell the closest approach of the sampled flight path is found;
/// the NPD level at that thrust and slant distance is reduced by lateral
/// attenuation and corrected for speed.
pub fn sel_field(traj: &Trajectory, ac: &AircraftType, geometry: &GridGeometry, settings: &NoiseSettings) -> SelField {
    assert!(!traj.samples.is_empty(), "empty trajectory");
    let index = SegmentIndex::new(traj);
    let npd = ac.npd_table.prepared();
    let mut sel = Vec::with_capacity(geometry.len());
    let mut clamped_cells = 0;
    let mut guess = 0;
    for iy in 0..geometry.ny {
        for ix in 0..geometry.nx {
            let (qx, qy) = geometry.center(geometry.index(ix, iy));
            let ca = index.approach(qx, qy, guess);
            guess = ca.segment;
            let (level, clamped) = sel_with_table(&npd, settings, &ca);
            clamped_cells += clamped as usize;
            sel.push(level as f32);
        }
    }
    SelField {
        grid: SelGrid {
            geometry: *geometry,
            sel,
        },
        clamped_cells,
    }
}

/// Closest approach of `traj` to one ground point; exposed for diagnostics.
pub fn closest_approach(traj: &Trajectory, x: f64, y: f64) -> ClosestApproach {
    SegmentIndex::new(traj).approach(x, y, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::airframe::synthetic_aircraft;
    use crate::trajectory::TrajectorySample;

    fn level_pass(h: f64, thrust: f64, v: f64) -> Trajectory {
        let samples = (0..=40)
            .map(|i| TrajectorySample {
                time: i as f64,
                x: -10_000.0 + 500.0 * i as f64,
                y: 0.0,
                s: 500.0 * i as f64,
                h,
                v_eas: v,
                v_tas: v,
                weight: 1.0,
                thrust,
                gamma: 0.0,
                bank: 0.0,
                fuel_flow: 0.0,
            })
            .collect();
        Trajectory {
            aircraft: "TEST".into(),
            samples,
            fuel_burned: 0.0,
            clamp_warnings: 0,
        }
    }

    #[test]
    fn cell_under_level_pass_at_knot() {
        let ac = synthetic_aircraft();
        let settings = NoiseSettings {
            reference_speed: 100.0,
            ..NoiseSettings::default()
        };
        let traj = level_pass(800.0, 160_000.0, 100.0);
        let g = GridGeometry::new(0.0, 0.0, 500.0, 1, 1).unwrap();
        let f = sel_field(&traj, &ac, &g, &settings);
        assert!((f.grid.sel[0] as f64 - 81.0).abs() < 1e-5);
        assert_eq!(f.clamped_cells, 0);
    }

    #[test]
    fn doubling_slant_distance_drops_one_decrement() {
        let ac = synthetic_aircraft();
        let settings = NoiseSettings {
            reference_speed: 100.0,
            ..NoiseSettings::default()
        };
        let g = GridGeometry::new(0.0, 0.0, 500.0, 1, 1).unwrap();
        let a = sel_field(&level_pass(500.0, 160_000.0, 100.0), &ac, &g, &settings).grid.sel[0];
        let b = sel_field(&level_pass(1000.0, 160_000.0, 100.0), &ac, &g, &settings).grid.sel[0];
        assert!(((a - b) as f64 - 7.0).abs() < 1e-4);
    }

    #[test]
    fn speed_correction_is_bounded() {
        let s = NoiseSettings::default();
        assert_eq!(s.speed_correction(s.reference_speed), 0.0);
        assert!((s.speed_correction(2.0 * s.reference_speed) + 3.0103).abs() < 1e-4);
        assert_eq!(s.speed_correction(1e-3), 5.0);
        assert_eq!(s.speed_correction(1e6), -5.0);
    }

    #[test]
    fn low_pass_counts_clamped_cells() {
        let ac = synthetic_aircraft();
        let traj = level_pass(50.0, 160_000.0, 100.0);
        let g = GridGeometry::new(0.0, 0.0, 500.0, 1, 1).unwrap();
        assert_eq!(sel_field(&traj, &ac, &g, &NoiseSettings::default()).clamped_cells, 1);
    }

    #[test]
    fn lateral_cells_are_attenuated_relative_to_distance_only() {
        let ac = synthetic_aircraft();
        let settings = NoiseSettings::default();
        let traj = level_pass(100.0, 160_000.0, 100.0);
        let g = GridGeometry::new(0.0, 2000.0, 500.0, 1, 1).unwrap();
        let f = sel_field(&traj, &ac, &g, &settings);
        let d = (2000.0f64 * 2000.0 + 100.0 * 100.0).sqrt();
        let raw = ac.npd_table.lookup(160_000.0, d).sel + settings.speed_correction(100.0);
        assert!((f.grid.sel[0] as f64) < raw - 5.0);
    }
}
