use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use super::SidDefinition;

/// Five-parameter ground track: straight `l1`, turn `r1` onto heading
/// `psi_mid`, straight `l2`, turn `r2`, then a closing straight to the
/// terminal fix. Radii are signed: positive turns left (counter-clockwise).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroundTrackParams {
    pub l1: f64,
    pub r1: f64,
    pub psi_mid: f64,
    pub l2: f64,
    pub r2: f64,
}

impl GroundTrackParams {
    /// Mirror image across the runway axis whose heading is `runway_heading`.
    pub fn mirrored(&self, runway_heading: f64) -> Self {
        Self {
            r1: -self.r1,
            r2: -self.r2,
            psi_mid: 2.0 * runway_heading - self.psi_mid,
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LegKind {
    /// Track to a fix.
    Tf,
    /// Radius to a fix.
    Rf,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Leg {
    Straight {
        start: (f64, f64),
        heading: f64,
        length: f64,
    },
    Arc {
        center: (f64, f64),
        /// Signed, positive for a left turn.
        radius: f64,
        start_heading: f64,
        /// Turn angle magnitude, rad, in `[0, 2π)`.
        sweep: f64,
    },
}

impl Leg {
    pub fn length(&self) -> f64 {
        match *self {
            Leg::Straight { length, .. } => length,
            Leg::Arc { radius, sweep, .. } => radius.abs() * sweep,
        }
    }

    pub fn kind(&self) -> LegKind {
        match self {
            Leg::Straight { .. } => LegKind::Tf,
            Leg::Arc { .. } => LegKind::Rf,
        }
    }

    fn at(&self, d: f64) -> TrackPoint {
        match *self {
            Leg::Straight { start, heading, .. } => TrackPoint {
                x: start.0 + d * heading.cos(),
                y: start.1 + d * heading.sin(),
                heading,
                turn_radius: None,
            },
            Leg::Arc {
                center,
                radius,
                start_heading,
                ..
            } => {
                let sign = radius.signum();
                let rho = radius.abs();
                let heading = start_heading + sign * d / rho;
                TrackPoint {
                    x: center.0 + sign * rho * heading.sin(),
                    y: center.1 - sign * rho * heading.cos(),
                    heading,
                    turn_radius: Some(radius),
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackPoint {
    pub x: f64,
    pub y: f64,
    /// Direction of travel, rad counter-clockwise from +x.
    pub heading: f64,
    /// Signed radius when on an arc.
    pub turn_radius: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackVertex {
    pub x: f64,
    pub y: f64,
    /// Along-track distance, m.
    pub s: f64,
    pub leg: LegKind,
    pub turn_radius: Option<f64>,
}

/// Continuous, tangent-continuous ground track made of TF and RF legs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTrack {
    legs: Vec<Leg>,
    starts: Vec<f64>,
    length: f64,
}

impl GroundTrack {
    pub fn from_legs(legs: Vec<Leg>) -> Self {
        let mut starts = Vec::with_capacity(legs.len());
        let mut acc = 0.0;
        for leg in &legs {
            starts.push(acc);
            acc += leg.length();
        }
        Self {
            legs,
            starts,
            length: acc,
        }
    }

    pub fn legs(&self) -> &[Leg] {
        &self.legs
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Point at along-track distance `s`. Beyond the end the final heading is held.
    pub fn point_at(&self, s: f64) -> TrackPoint {
        let s = s.max(0.0);
        let i = match self.starts.iter().rposition(|&st| st <= s) {
            Some(i) => i,
            None => 0,
        };
        let leg = &self.legs[i];
        let d = s - self.starts[i];
        if i + 1 == self.legs.len() && d > leg.length() {
            let end = leg.at(leg.length());
            let extra = d - leg.length();
            return TrackPoint {
                x: end.x + extra * end.heading.cos(),
                y: end.y + extra * end.heading.sin(),
                heading: end.heading,
                turn_radius: None,
            };
        }
        leg.at(d)
    }

    pub fn end_point(&self) -> TrackPoint {
        self.point_at(self.length)
    }

    /// Vertices no further than `max_spacing` apart, plus every leg junction.
    pub fn polyline(&self, max_spacing: f64) -> Vec<TrackVertex> {
        let mut out = Vec::new();
        for (leg, &start) in self.legs.iter().zip(&self.starts) {
            let len = leg.length();
            let n = ((len / max_spacing).ceil() as usize).max(1);
            let first = if out.is_empty() { 0 } else { 1 };
            for j in first..=n {
                let d = len * j as f64 / n as f64;
                let p = leg.at(d);
                out.push(TrackVertex {
                    x: p.x,
                    y: p.y,
                    s: start + d,
                    leg: leg.kind(),
                    turn_radius: p.turn_radius,
                });
            }
        }
        out
    }

    /// Reflection across the line through `origin` with direction `axis_heading`.
    pub fn mirrored(&self, origin: (f64, f64), axis_heading: f64) -> Self {
        let reflect_pt = |p: (f64, f64)| reflect(p, origin, axis_heading);
        let reflect_h = |h: f64| 2.0 * axis_heading - h;
        let legs = self
            .legs
            .iter()
            .map(|leg| match *leg {
                Leg::Straight { start, heading, length } => Leg::Straight {
                    start: reflect_pt(start),
                    heading: reflect_h(heading),
                    length,
                },
                Leg::Arc {
                    center,
                    radius,
                    start_heading,
                    sweep,
                } => Leg::Arc {
                    center: reflect_pt(center),
                    radius: -radius,
                    start_heading: reflect_h(start_heading),
                    sweep,
                },
            })
            .collect();
        Self::from_legs(legs)
    }
}

pub(crate) fn reflect(p: (f64, f64), origin: (f64, f64), axis_heading: f64) -> (f64, f64) {
    let (c, s) = ((2.0 * axis_heading).cos(), (2.0 * axis_heading).sin());
    let (dx, dy) = (p.0 - origin.0, p.1 - origin.1);
    (origin.0 + c * dx + s * dy, origin.1 + s * dx - c * dy)
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
pub enum TrackError {
    /// The parameters cannot close on the terminal fix; `violation` (m) measures by how much.
    #[error("ground track cannot reach the terminal fix (violation {violation:.3} m)")]
    InfeasibleGeometry { violation: f64 },
    #[error("invalid ground-track parameter: {0}")]
    InvalidParameter(&'static str),
}

impl TrackError {
    pub fn violation(&self) -> f64 {
        match *self {
            TrackError::InfeasibleGeometry { violation } => violation,
            TrackError::InvalidParameter(_) => 1.0,
        }
    }
}

/// Turn angle from `from` to `to` in the direction given by `sign` (+1 left).
fn sweep_between(from: f64, to: f64, sign: f64) -> f64 {
    let raw = (sign * (to - from)).rem_euclid(TAU);
    if raw > TAU - 1e-9 || raw < 1e-12 {
        0.0
    } else {
        raw
    }
}

fn arc_leg(start: (f64, f64), heading: f64, radius: f64, sweep: f64) -> Leg {
    let sign = radius.signum();
    let rho = radius.abs();
    let center = (start.0 - sign * rho * heading.sin(), start.1 + sign * rho * heading.cos());
    Leg::Arc {
        center,
        radius,
        start_heading: heading,
        sweep,
    }
}

/// Builds the TF–RF–TF–RF–TF ground track for a SID.
pub fn synthesize_track(sid: &SidDefinition, p: &GroundTrackParams, min_turn_radius: f64) -> Result<GroundTrack, TrackError> {
    let finite = [p.l1, p.r1, p.psi_mid, p.l2, p.r2].iter().all(|v| v.is_finite());
    if !finite {
        return Err(TrackError::InvalidParameter("non-finite value"));
    }
    if p.l1 < 0.0 || p.l2 < 0.0 {
        return Err(TrackError::InfeasibleGeometry {
            violation: (-p.l1).max(0.0) + (-p.l2).max(0.0),
        });
    }
    let radius_gap = (min_turn_radius - p.r1.abs()).max(0.0) + (min_turn_radius - p.r2.abs()).max(0.0);
    if radius_gap > 0.0 {
        return Err(TrackError::InfeasibleGeometry { violation: radius_gap });
    }

    let mut legs = Vec::with_capacity(5);
    let psi0 = sid.initial_heading;
    let first = Leg::Straight {
        start: sid.runway_start,
        heading: psi0,
        length: p.l1,
    };
    let p1 = first.at(p.l1);
    legs.push(first);

    let sweep1 = sweep_between(psi0, p.psi_mid, p.r1.signum());
    let arc1 = arc_leg((p1.x, p1.y), psi0, p.r1, sweep1);
    let p2 = arc1.at(arc1.length());
    legs.push(arc1);

    let mid = Leg::Straight {
        start: (p2.x, p2.y),
        heading: p2.heading,
        length: p.l2,
    };
    let p3 = mid.at(p.l2);
    legs.push(mid);

    // Tangent from arc 2 to the terminal fix.
    let sign = p.r2.signum();
    let rho = p.r2.abs();
    let c2 = (p3.x - sign * rho * p3.heading.sin(), p3.y + sign * rho * p3.heading.cos());
    let (fx, fy) = sid.terminal_fix;
    let dist = ((fx - c2.0).powi(2) + (fy - c2.1).powi(2)).sqrt();
    if dist < rho {
        return Err(TrackError::InfeasibleGeometry { violation: rho - dist });
    }
    let closing = (dist * dist - rho * rho).sqrt();
    let bearing = (fy - c2.1).atan2(fx - c2.0);
    let final_heading = bearing + sign * rho.atan2(closing);
    let sweep2 = sweep_between(p3.heading, final_heading, sign);
    let arc2 = arc_leg((p3.x, p3.y), p3.heading, p.r2, sweep2);
    let p4 = arc2.at(arc2.length());
    legs.push(arc2);
    legs.push(Leg::Straight {
        start: (p4.x, p4.y),
        heading: p4.heading,
        length: closing,
    });
    let track = GroundTrack::from_legs(legs);
    debug_assert!({
        let e = track.end_point();
        ((e.x - fx).powi(2) + (e.y - fy).powi(2)).sqrt() < 1e-3 * (1.0 + dist)
    });
    Ok(track)
}

/// Heading normalised to `(-π, π]`.
pub fn normalize_heading(h: f64) -> f64 {
    let r = h.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::sid::tests::east_sid;
    use proptest::prelude::*;

    #[test]
    fn straight_ahead_degenerates_to_direct_route() {
        let mut sid = east_sid();
        sid.terminal_fix = (30_000.0, 0.0);
        let p = GroundTrackParams {
            l1: 3000.0,
            r1: 2500.0,
            psi_mid: 0.0,
            l2: 5000.0,
            r2: 2500.0,
        };
        let t = synthesize_track(&sid, &p, 1500.0).unwrap();
        assert!((t.length() - 30_000.0).abs() < 1e-6, "{}", t.length());
        let e = t.end_point();
        assert!((e.x - 30_000.0).abs() < 1e-6 && e.y.abs() < 1e-6);
    }

    #[test]
    fn mirrored_parameters_mirror_the_polyline() {
        let sid = east_sid();
        let p = GroundTrackParams {
            l1: 2000.0,
            r1: 3000.0,
            psi_mid: 0.8,
            l2: 4000.0,
            r2: -4000.0,
        };
        let mut msid = sid.clone();
        msid.terminal_fix = (sid.terminal_fix.0, -sid.terminal_fix.1);
        let a = synthesize_track(&sid, &p, 1500.0).unwrap();
        let b = synthesize_track(&msid, &p.mirrored(0.0), 1500.0).unwrap();
        assert!((a.length() - b.length()).abs() < 1e-6);
        for (u, v) in a.polyline(250.0).iter().zip(b.polyline(250.0).iter()) {
            assert!((u.x - v.x).abs() < 1e-6 && (u.y + v.y).abs() < 1e-6);
            assert_eq!(u.leg, v.leg);
        }
    }

    #[test]
    fn fix_inside_turn_circle_is_infeasible_with_violation() {
        let mut sid = east_sid();
        sid.terminal_fix = (6000.0, 1000.0);
        let p = GroundTrackParams {
            l1: 2000.0,
            r1: 2000.0,
            psi_mid: 0.0,
            l2: 2000.0,
            r2: 5000.0,
        };
        match synthesize_track(&sid, &p, 1500.0) {
            Err(TrackError::InfeasibleGeometry { violation }) => assert!(violation > 0.0),
            other => panic!("expected infeasible geometry, got {other:?}"),
        }
    }

    #[test]
    fn small_radius_is_rejected() {
        let sid = east_sid();
        let p = GroundTrackParams {
            l1: 2000.0,
            r1: 1000.0,
            psi_mid: 0.5,
            l2: 2000.0,
            r2: 2000.0,
        };
        let err = synthesize_track(&sid, &p, 1500.0).unwrap_err();
        assert!((err.violation() - 500.0).abs() < 1e-9);
    }

    #[test]
    fn polyline_tags_legs() {
        let sid = east_sid();
        let p = GroundTrackParams {
            l1: 2000.0,
            r1: 3000.0,
            psi_mid: 0.6,
            l2: 2000.0,
            r2: -3000.0,
        };
        let t = synthesize_track(&sid, &p, 1500.0).unwrap();
        let poly = t.polyline(100.0);
        assert!(poly.iter().any(|v| v.leg == LegKind::Rf && v.turn_radius == Some(3000.0)));
        assert!(poly.iter().any(|v| v.turn_radius == Some(-3000.0)));
        assert!(poly.windows(2).all(|w| w[1].s > w[0].s));
        assert!((poly.last().unwrap().s - t.length()).abs() < 1e-9);
    }

    #[test]
    fn extrapolates_past_the_end() {
        let sid = east_sid();
        let p = GroundTrackParams {
            l1: 2000.0,
            r1: 3000.0,
            psi_mid: 0.6,
            l2: 2000.0,
            r2: -3000.0,
        };
        let t = synthesize_track(&sid, &p, 1500.0).unwrap();
        let e = t.end_point();
        let beyond = t.point_at(t.length() + 1000.0);
        assert!((beyond.x - (e.x + 1000.0 * e.heading.cos())).abs() < 1e-9);
        assert!(beyond.turn_radius.is_none());
    }

    proptest! {
        #[test]
        fn random_feasible_tracks_close_on_the_fix(
            l1 in 0.0f64..8000.0,
            r1 in 1500.0f64..8000.0,
            left1 in any::<bool>(),
            psi_mid in -1.2f64..1.6,
            l2 in 0.0f64..10_000.0,
            r2 in 1500.0f64..8000.0,
            left2 in any::<bool>(),
        ) {
            let sid = east_sid();
            let p = GroundTrackParams {
                l1,
                r1: if left1 { r1 } else { -r1 },
                psi_mid,
                l2,
                r2: if left2 { r2 } else { -r2 },
            };
            let Ok(t) = synthesize_track(&sid, &p, 1500.0) else { return Ok(()); };
            let e = t.end_point();
            let (fx, fy) = sid.terminal_fix;
            prop_assert!(((e.x - fx).powi(2) + (e.y - fy).powi(2)).sqrt() < 1.0);
            // Heading and position continuity at every junction.
            let legs = t.legs();
            let mut s = 0.0;
            for w in legs.windows(2) {
                s += w[0].length();
                let end = w[0].at(w[0].length());
                let start = w[1].at(0.0);
                let dh = normalize_heading(end.heading - start.heading);
                prop_assert!(dh.abs() < 1e-9, "heading jump {dh} at s={s}");
                prop_assert!((end.x - start.x).abs() < 1e-6 && (end.y - start.y).abs() < 1e-6);
            }
            let direct = ((fx - sid.runway_start.0).powi(2) + (fy - sid.runway_start.1).powi(2)).sqrt();
            prop_assert!(t.length() >= direct - 1e-6);
        }
    }
}
