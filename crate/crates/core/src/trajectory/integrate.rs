use super::profile::{DepartureSettings, VerticalProfile, FREE_SEGMENTS};
use super::track::GroundTrack;
use super::{bank_angle, SidDefinition, Trajectory, TrajectoryError, TrajectorySample};
use crate::airframe::{AircraftType, Atmosphere};
use crate::units::G0;

type State = [f64; 4];
const V: usize = 0;
const S: usize = 1;
const H: usize = 2;
const W: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Phase {
    Takeoff,
    Accelerate,
    Climb,
    Segment(usize),
    Constant,
}

/// Control law active over one step.
#[derive(Debug, Clone, Copy)]
enum Law {
    /// Terminal conditions met: level, thrust equals drag.
    Cruise,
    /// Level flight at the given throttle.
    Level { throttle: f64 },
    /// Climb at `min(gamma, γ_eq)` where `γ_eq` holds speed at full available
    /// thrust. On the commanded branch `accelerate` keeps the available thrust,
    /// otherwise thrust is reduced to hold speed.
    Hold { throttle: f64, gamma: f64, accelerate: bool },
    /// Spend `share` of the excess specific power on climbing, capped at `gamma_cap`.
    Share { throttle: f64, share: f64, gamma_cap: f64 },
}

#[derive(Debug, Clone, Copy)]
struct Control {
    thrust: f64,
    gamma: f64,
    clamped: bool,
    /// Sign selects the branch of a `min`; zero for laws without one.
    switch: f64,
}

struct Sim<'a> {
    ac: &'a AircraftType,
    atm: &'a Atmosphere,
    sid: &'a SidDefinition,
    track: &'a GroundTrack,
    profile: &'a VerticalProfile,
    cfg: &'a DepartureSettings,
    phase: Phase,
    config: usize,
    altitude_reached: bool,
    speed_reached: bool,
    past_end: bool,
    segment_ends: [f64; FREE_SEGMENTS],
    branch: bool,
}

impl<'a> Sim<'a> {
    fn law(&self) -> Law {
        let gamma_cap = self.cfg.max_flight_path_angle;
        let (throttle, gamma) = match (self.phase, self.profile) {
            (Phase::Takeoff, _) => (1.0, gamma_cap),
            (Phase::Accelerate | Phase::Climb, _) => (0.0, gamma_cap),
            (Phase::Segment(k), VerticalProfile::Segmented(p)) => {
                let seg = p.segments[k];
                (seg.throttle, seg.flight_path_angle.min(gamma_cap))
            }
            (
                Phase::Constant,
                VerticalProfile::Constant {
                    throttle,
                    flight_path_angle,
                },
            ) => (*throttle, flight_path_angle.min(gamma_cap)),
            _ => unreachable!("phase does not belong to the profile"),
        };
        match (self.altitude_reached, self.speed_reached) {
            (true, true) => Law::Cruise,
            (true, false) => Law::Level { throttle },
            (false, true) => Law::Hold {
                throttle,
                gamma,
                accelerate: false,
            },
            (false, false) => match self.phase {
                Phase::Takeoff => Law::Hold {
                    throttle,
                    gamma,
                    accelerate: false,
                },
                Phase::Accelerate => Law::Share {
                    throttle,
                    share: self.cfg.nadp2_acceleration_share,
                    gamma_cap,
                },
                Phase::Climb => Law::Share {
                    throttle,
                    share: self.cfg.nadp2_climb_share,
                    gamma_cap,
                },
                Phase::Segment(_) | Phase::Constant => Law::Hold {
                    throttle,
                    gamma,
                    accelerate: true,
                },
            },
        }
    }

    fn control(&self, law: Law, y: &State, branch: bool) -> Control {
        let (rho, drho) = self.atm.density_and_gradient(y[H].clamp(0.0, crate::airframe::TROPOPAUSE_M));
        let rho0 = self.atm.sea_level_density;
        let v_tas = y[V] * (rho0 / rho).sqrt();
        let drag = self.ac.drag_in_configuration(self.atm, self.config, y[V], y[W]);
        // Climb-induced EAS change per unit sin γ, from the density gradient.
        let c = drho * y[V] * y[V] * rho0 / (2.0 * rho * rho);
        let hold_thrust = |gamma: f64| drag + y[W] * gamma.sin() * (G0 - c) / G0;
        let sin_eq = |thrust: f64| G0 * (thrust - drag) / y[W] / (G0 - c);
        let available = |throttle: f64| self.ac.available_thrust_checked(self.atm, throttle, y[H], v_tas);
        match law {
            Law::Cruise => {
                let (max, clamped) = available(1.0);
                Control {
                    thrust: drag.min(max),
                    gamma: 0.0,
                    clamped,
                    switch: 0.0,
                }
            }
            Law::Level { throttle } => {
                let (thrust, clamped) = available(throttle);
                Control {
                    thrust,
                    gamma: 0.0,
                    clamped,
                    switch: 0.0,
                }
            }
            Law::Hold {
                throttle,
                gamma,
                accelerate,
            } => {
                let (avail, clamped) = available(throttle);
                let gamma_eq = sin_eq(avail).clamp(-1.0, 1.0).asin();
                if branch {
                    let thrust = if accelerate { avail } else { hold_thrust(gamma) };
                    Control {
                        thrust,
                        gamma,
                        clamped,
                        switch: gamma_eq - gamma,
                    }
                } else {
                    Control {
                        thrust: avail,
                        gamma: gamma_eq,
                        clamped,
                        switch: gamma_eq - gamma,
                    }
                }
            }
            Law::Share {
                throttle,
                share,
                gamma_cap,
            } => {
                let (avail, clamped) = available(throttle);
                let gamma_share = (share * sin_eq(avail)).clamp(-1.0, 1.0).asin();
                Control {
                    thrust: avail,
                    gamma: if branch { gamma_share } else { gamma_cap },
                    clamped,
                    switch: gamma_cap - gamma_share,
                }
            }
        }
    }

    fn derivative(&self, law: Law, branch: bool, y: &State) -> (State, Control) {
        let u = self.control(law, y, branch);
        let (rho, drho) = self.atm.density_and_gradient(y[H].clamp(0.0, crate::airframe::TROPOPAUSE_M));
        let rho0 = self.atm.sea_level_density;
        let root = (rho / rho0).sqrt();
        let v_tas = y[V] / root;
        let drag = self.ac.drag_in_configuration(self.atm, self.config, y[V], y[W]);
        let sg = u.gamma.sin();
        let v_dot = (G0 * ((u.thrust - drag) / y[W] - sg) + drho * y[V] * y[V] * rho0 * sg / (2.0 * rho * rho)) * root;
        let fuel = self.ac.fuel_flow(u.thrust, v_tas, y[H]);
        ([v_dot, v_tas * u.gamma.cos(), v_tas * sg, -fuel * G0], u)
    }

    fn rk4(&self, law: Law, branch: bool, y: &State, dt: f64) -> State {
        let add = |a: &State, k: &State, f: f64| [a[0] + f * k[0], a[1] + f * k[1], a[2] + f * k[2], a[3] + f * k[3]];
        let (k1, _) = self.derivative(law, branch, y);
        let (k2, _) = self.derivative(law, branch, &add(y, &k1, 0.5 * dt));
        let (k3, _) = self.derivative(law, branch, &add(y, &k2, 0.5 * dt));
        let (k4, _) = self.derivative(law, branch, &add(y, &k3, dt));
        let mut out = *y;
        for j in 0..4 {
            out[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
        }
        out
    }

    /// True when `y` lies past any pending event of the current discrete state.
    fn event_pending(&self, law: Law, y: &State) -> bool {
        if self.phase == Phase::Takeoff && y[H] >= self.cfg.cutback_altitude {
            return true;
        }
        if let Phase::Segment(k) = self.phase {
            if k + 1 < FREE_SEGMENTS && y[S] >= self.segment_ends[k] {
                return true;
            }
        }
        if self.config + 1 < self.ac.flap_schedule.len() && y[V] >= self.ac.flap_schedule[self.config].max_eas {
            return true;
        }
        if (!self.altitude_reached && y[H] >= self.sid.terminal_altitude)
            || (!self.speed_reached && y[V] >= self.sid.terminal_eas)
            || (!self.past_end && y[S] >= self.track.length())
        {
            return true;
        }
        match law {
            Law::Hold { .. } | Law::Share { .. } => (self.control(law, y, self.branch).switch >= 0.0) != self.branch,
            _ => false,
        }
    }

    /// Applies every discrete transition implied by `y`.
    fn update(&mut self, y: &State) {
        for _ in 0..2 * (FREE_SEGMENTS + self.ac.flap_schedule.len() + 4) {
            let mut changed = false;
            if self.phase == Phase::Takeoff && y[H] >= self.cfg.cutback_altitude {
                self.phase = match self.profile {
                    VerticalProfile::Segmented(_) => {
                        let start = y[S];
                        let remaining = (self.track.length() - start).max(0.0);
                        for (k, end) in self.segment_ends.iter_mut().enumerate() {
                            *end = start + remaining * (k + 1) as f64 / FREE_SEGMENTS as f64;
                        }
                        Phase::Segment(0)
                    }
                    _ => Phase::Accelerate,
                };
                changed = true;
            }
            if let Phase::Segment(k) = self.phase {
                if k + 1 < FREE_SEGMENTS && y[S] >= self.segment_ends[k] {
                    self.phase = Phase::Segment(k + 1);
                    changed = true;
                }
            }
            if self.config + 1 < self.ac.flap_schedule.len() && y[V] >= self.ac.flap_schedule[self.config].max_eas {
                self.config += 1;
                changed = true;
            }
            if self.phase == Phase::Accelerate && self.config + 1 == self.ac.flap_schedule.len() {
                self.phase = Phase::Climb;
                changed = true;
            }
            if !self.altitude_reached && y[H] >= self.sid.terminal_altitude {
                self.altitude_reached = true;
                changed = true;
            }
            if !self.speed_reached && y[V] >= self.sid.terminal_eas {
                self.speed_reached = true;
                changed = true;
            }
            if !self.past_end && y[S] >= self.track.length() {
                self.past_end = true;
                changed = true;
            }
            if !changed {
                break;
            }
        }
        let law = self.law();
        self.branch = self.control(law, y, true).switch >= 0.0;
    }

    fn finished(&self) -> bool {
        self.altitude_reached && self.speed_reached && self.past_end
    }

    fn progress(&self, y: &State) -> f64 {
        let alt = (y[H] - self.sid.start_altitude) / (self.sid.terminal_altitude - self.sid.start_altitude);
        let spd = y[V] / self.sid.terminal_eas;
        let dist = y[S] / self.track.length().max(1.0);
        0.5 * alt.clamp(0.0, 1.0) + 0.25 * spd.clamp(0.0, 1.0) + 0.25 * dist.clamp(0.0, 1.0)
    }

    fn sample(&self, t: f64, y: &State, u: &Control) -> Result<TrajectorySample, TrajectoryError> {
        let rho = self.atm.density_unchecked(y[H].clamp(0.0, crate::airframe::TROPOPAUSE_M));
        let v_tas = eas_tas_convert(y[V], rho, self.atm.sea_level_density, Conversion::EasToTas);
        let p = self.track.point_at(y[S]);
        let bank = match p.turn_radius {
            Some(r) => bank_angle(v_tas, r)?,
            None => 0.0,
        };
        Ok(TrajectorySample {
            time: t,
            x: p.x,
            y: p.y,
            s: y[S],
            h: y[H],
            v_eas: y[V],
            v_tas,
            weight: y[W],
            thrust: u.thrust,
            gamma: u.gamma,
            bank,
            fuel_flow: self.ac.fuel_flow(u.thrust, v_tas, y[H]),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Conversion {
    EasToTas,
    TasToEas,
}

/// Converts between equivalent and true airspeed at density `rho`.
pub fn eas_tas_convert(v: f64, rho: f64, rho0: f64, direction: Conversion) -> f64 {
    match direction {
        Conversion::EasToTas => v * (rho0 / rho).sqrt(),
        Conversion::TasToEas => v * (rho / rho0).sqrt(),
    }
}

/// Flies `ac` along `track` with the given vertical profile until the terminal
/// altitude and EAS are both reached and the end of the track has been passed.
pub fn integrate_departure(
    ac: &AircraftType,
    atm: &Atmosphere,
    sid: &SidDefinition,
    track: &GroundTrack,
    profile: &VerticalProfile,
    cfg: &DepartureSettings,
) -> Result<Trajectory, TrajectoryError> {
    run(ac, atm, sid, track, profile, cfg, None)
}

/// As [`integrate_departure`] but stops after `duration` seconds regardless of
/// the terminal conditions.
pub fn simulate_for(
    ac: &AircraftType,
    atm: &Atmosphere,
    sid: &SidDefinition,
    track: &GroundTrack,
    profile: &VerticalProfile,
    cfg: &DepartureSettings,
    duration: f64,
) -> Result<Trajectory, TrajectoryError> {
    run(ac, atm, sid, track, profile, cfg, Some(duration))
}

fn run(
    ac: &AircraftType,
    atm: &Atmosphere,
    sid: &SidDefinition,
    track: &GroundTrack,
    profile: &VerticalProfile,
    cfg: &DepartureSettings,
    stop_at: Option<f64>,
) -> Result<Trajectory, TrajectoryError> {
    let v0 = ac.v2_plus10;
    let config = ac
        .configuration_for(v0)
        .ok_or(TrajectoryError::Airframe(crate::airframe::AirframeError::SpeedOutsideFlapSchedule(v0)))?;
    let mut sim = Sim {
        ac,
        atm,
        sid,
        track,
        profile,
        cfg,
        phase: match profile {
            VerticalProfile::Constant { .. } => Phase::Constant,
            _ => Phase::Takeoff,
        },
        config,
        altitude_reached: false,
        speed_reached: false,
        past_end: false,
        segment_ends: [f64::INFINITY; FREE_SEGMENTS],
        branch: true,
    };
    let mut y: State = [v0, 0.0, sid.start_altitude, ac.reference_weight()];
    let mut t = 0.0;
    sim.update(&y);
    let end_time = stop_at.unwrap_or(cfg.max_flight_time_s);

    let mut samples = Vec::with_capacity((end_time / cfg.step_s).min(1e5) as usize + 16);
    let mut clamp_warnings = 0usize;
    let mut record = |sim: &Sim<'_>, t: f64, y: &State| -> Result<(), TrajectoryError> {
        let law = sim.law();
        let (dy, u) = sim.derivative(law, sim.branch, y);
        if dy[V] < -1e-9 || u.gamma < -1e-12 {
            return Err(TrajectoryError::MonotonicityInfeasible {
                time: t,
                violation: (-dy[V]).max(0.0) / G0 + (-u.gamma).max(0.0) + (1.0 - sim.progress(y)),
            });
        }
        clamp_warnings += u.clamped as usize;
        samples.push(sim.sample(t, y, &u)?);
        Ok(())
    };
    record(&sim, t, &y)?;

    loop {
        if sim.finished() && stop_at.is_none() {
            break;
        }
        if t >= end_time - 1e-12 {
            if stop_at.is_some() {
                break;
            }
            return Err(TrajectoryError::Timeout {
                time: t,
                violation: 1.0 - sim.progress(&y),
            });
        }
        let law = sim.law();
        let dt = cfg.step_s.min(end_time - t);
        let mut next = sim.rk4(law, sim.branch, &y, dt);
        let mut taken = dt;
        if sim.event_pending(law, &next) {
            let (mut lo, mut hi) = (0.0, dt);
            let mut hi_state = next;
            while hi - lo > cfg.event_tolerance_s {
                let mid = 0.5 * (lo + hi);
                let trial = sim.rk4(law, sim.branch, &y, mid);
                if sim.event_pending(law, &trial) {
                    hi = mid;
                    hi_state = trial;
                } else {
                    lo = mid;
                }
            }
            next = hi_state;
            taken = hi;
        }
        if next.iter().any(|v| !v.is_finite()) || next[W] <= 0.0 {
            return Err(TrajectoryError::NonFinite { time: t });
        }
        t += taken;
        y = next;
        sim.update(&y);
        record(&sim, t, &y)?;
    }

    let fuel_burned = (samples[0].weight - y[W]) / G0;
    Ok(Trajectory {
        aircraft: ac.name.clone(),
        samples,
        fuel_burned,
        clamp_warnings,
    })
}
