use serde::{Deserialize, Serialize};

use super::{AirframeError, Atmosphere};
use crate::noise::NpdTable;
use crate::units::G0;

/// Multiplicative thrust lapse: `T = T0 · (ρ/ρ0)^a · (1 − b·V_TAS)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThrustLapse {
    pub density_exponent: f64,
    /// 1/(m/s)
    pub speed_coefficient: f64,
}

/// One flap configuration: parabolic polar valid over an EAS band.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlapConfiguration {
    pub name: String,
    /// m/s EAS, inclusive
    pub min_eas: f64,
    /// m/s EAS, exclusive except for the last configuration
    pub max_eas: f64,
    /// m²
    pub wing_area: f64,
    pub cd0: f64,
    pub k: f64,
}

/// Affine fuel flow: `ṁ = c0 + c1 · T · (1 + c2 · V_TAS)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FuelFlowModel {
    /// kg/s at zero thrust
    pub idle: f64,
    /// kg/(N·s)
    pub thrust_coefficient: f64,
    /// 1/(m/s)
    pub speed_coefficient: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AircraftType {
    pub name: String,
    /// kg, mass at the start of the departure
    pub reference_mass: f64,
    /// N, sea-level static, all engines
    pub max_takeoff_thrust: f64,
    /// Ratio of climb thrust to max take-off thrust at the same (h, V).
    pub climb_thrust_fraction: f64,
    pub thrust_lapse: ThrustLapse,
    /// Ordered by increasing speed; bands must be contiguous.
    pub flap_schedule: Vec<FlapConfiguration>,
    pub fuel_flow_model: FuelFlowModel,
    /// m/s EAS, initial speed of the departure.
    pub v2_plus10: f64,
    pub npd_table: NpdTable,
}

impl AircraftType {
    pub fn reference_weight(&self) -> f64 {
        self.reference_mass * G0
    }

    /// Max take-off thrust at `(h, v_tas)` and whether the envelope had to be clamped.
    fn max_thrust_at(&self, atm: &Atmosphere, h: f64, v_tas: f64) -> (f64, bool) {
        let mut clamped = false;
        let h_c = h.clamp(0.0, super::atmosphere::TROPOPAUSE_M);
        clamped |= h_c != h;
        let sigma = atm.density_unchecked(h_c) / atm.sea_level_density;
        let mut speed_factor = 1.0 - self.thrust_lapse.speed_coefficient * v_tas.max(0.0);
        if speed_factor < 0.0 {
            speed_factor = 0.0;
            clamped = true;
        }
        (
            self.max_takeoff_thrust * sigma.powf(self.thrust_lapse.density_exponent) * speed_factor,
            clamped,
        )
    }

    /// Available thrust in N. `throttle` spans climb thrust (0) to max take-off thrust (1)
    /// linearly. Out-of-envelope inputs are clamped.
    pub fn available_thrust(&self, atm: &Atmosphere, throttle: f64, h: f64, v_tas: f64) -> f64 {
        self.available_thrust_checked(atm, throttle, h, v_tas).0
    }

    /// As [`available_thrust`](Self::available_thrust), also reporting whether any input was clamped.
    pub fn available_thrust_checked(
        &self,
        atm: &Atmosphere,
        throttle: f64,
        h: f64,
        v_tas: f64,
    ) -> (f64, bool) {
        let t = throttle.clamp(0.0, 1.0);
        let (max, clamped) = self.max_thrust_at(atm, h, v_tas);
        let fraction = self.climb_thrust_fraction + (1.0 - self.climb_thrust_fraction) * t;
        (max * fraction, clamped || t != throttle)
    }

    /// Index of the flap configuration whose band contains `v_eas`.
    pub fn configuration_for(&self, v_eas: f64) -> Option<usize> {
        let last = self.flap_schedule.len().checked_sub(1)?;
        self.flap_schedule.iter().enumerate().position(|(i, c)| {
            v_eas >= c.min_eas && (v_eas < c.max_eas || (i == last && v_eas <= c.max_eas))
        })
    }

    /// Drag in N with the configuration selected by `v_eas`.
    ///
    /// Dynamic pressure comes from EAS (`q = ½ρ0·V_EAS²`), so `h` only matters
    /// through the caller's EAS/TAS conversion.
    pub fn drag(&self, atm: &Atmosphere, _h: f64, v_eas: f64, weight: f64) -> Result<f64, AirframeError> {
        let config = self
            .configuration_for(v_eas)
            .ok_or(AirframeError::SpeedOutsideFlapSchedule(v_eas))?;
        Ok(self.drag_in_configuration(atm, config, v_eas, weight))
    }

    /// Drag in a given configuration; no band check.
    pub fn drag_in_configuration(&self, atm: &Atmosphere, config: usize, v_eas: f64, weight: f64) -> f64 {
        let c = &self.flap_schedule[config];
        let qs = 0.5 * atm.sea_level_density * v_eas * v_eas * c.wing_area;
        if qs <= 0.0 {
            return 0.0;
        }
        let cl = weight / qs;
        qs * (c.cd0 + c.k * cl * cl)
    }

    /// Fuel flow in kg/s.
    pub fn fuel_flow(&self, thrust: f64, v_tas: f64, _h: f64) -> f64 {
        let m = &self.fuel_flow_model;
        m.idle + m.thrust_coefficient * thrust.max(0.0) * (1.0 + m.speed_coefficient * v_tas.max(0.0))
    }

    /// Checks the data-set invariants, including that the aircraft can depart at all.
    pub fn validate(&self, atm: &Atmosphere) -> Result<(), AirframeError> {
        let invalid = |rule: &str| AirframeError::InvalidAircraft {
            name: self.name.clone(),
            rule: rule.to_string(),
        };
        if self.reference_mass <= 0.0 || !self.reference_mass.is_finite() {
            return Err(invalid("reference mass must be positive"));
        }
        if self.max_takeoff_thrust <= 0.0 {
            return Err(invalid("max take-off thrust must be positive"));
        }
        if !(self.climb_thrust_fraction > 0.0 && self.climb_thrust_fraction <= 1.0) {
            return Err(invalid("climb thrust fraction must lie in (0, 1]"));
        }
        if self.thrust_lapse.density_exponent < 0.0 || self.thrust_lapse.speed_coefficient < 0.0 {
            return Err(invalid("thrust lapse coefficients must be non-negative"));
        }
        let ff = &self.fuel_flow_model;
        if ff.idle < 0.0 || ff.thrust_coefficient < 0.0 || ff.speed_coefficient < 0.0 {
            return Err(invalid("fuel flow coefficients must be non-negative"));
        }
        if self.flap_schedule.is_empty() {
            return Err(invalid("flap schedule is empty"));
        }
        for (i, c) in self.flap_schedule.iter().enumerate() {
            if !(c.min_eas < c.max_eas) {
                return Err(invalid(&format!("flap band '{}' is empty", c.name)));
            }
            if c.wing_area <= 0.0 || c.cd0 < 0.0 || c.k < 0.0 {
                return Err(invalid(&format!("flap configuration '{}' has invalid polar", c.name)));
            }
            if i > 0 && (self.flap_schedule[i - 1].max_eas - c.min_eas).abs() > 1e-9 {
                return Err(invalid(&format!(
                    "flap band '{}' does not start where the previous band ends",
                    c.name
                )));
            }
        }
        if self.configuration_for(self.v2_plus10) != Some(0) {
            return Err(invalid("V2+10 must lie in the first flap band"));
        }
        self.npd_table.validate().map_err(|e| invalid(&e.to_string()))?;
        let v_tas = self.v2_plus10;
        let thrust = self.available_thrust(atm, 1.0, 0.0, v_tas);
        let drag = self.drag_in_configuration(atm, 0, self.v2_plus10, self.reference_weight());
        if thrust <= drag {
            return Err(invalid("take-off thrust does not exceed drag at V2+10"));
        }
        Ok(())
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::noise::NpdTable;
    use proptest::prelude::*;

    /// Round-number aircraft used across unit tests.
    pub(crate) fn synthetic_aircraft() -> AircraftType {
        AircraftType {
            name: "TEST".into(),
            reference_mass: 70_000.0,
            max_takeoff_thrust: 240_000.0,
            climb_thrust_fraction: 0.8,
            thrust_lapse: ThrustLapse {
                density_exponent: 0.75,
                speed_coefficient: 0.002,
            },
            flap_schedule: vec![
                FlapConfiguration {
                    name: "takeoff".into(),
                    min_eas: 70.0,
                    max_eas: 95.0,
                    wing_area: 125.0,
                    cd0: 0.045,
                    k: 0.04,
                },
                FlapConfiguration {
                    name: "clean".into(),
                    min_eas: 95.0,
                    max_eas: 170.0,
                    wing_area: 125.0,
                    cd0: 0.022,
                    k: 0.045,
                },
            ],
            fuel_flow_model: FuelFlowModel {
                idle: 0.15,
                thrust_coefficient: 1.2e-5,
                speed_coefficient: 0.001,
            },
            v2_plus10: 82.0,
            npd_table: NpdTable::synthetic_for_tests(),
        }
    }

    #[test]
    fn throttle_band_endpoints_and_linearity() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let v = ac.v2_plus10;
        let top = ac.available_thrust(&atm, 1.0, 0.0, v);
        assert!((top - 240_000.0 * (1.0 - 0.002 * v)).abs() < 1e-6);
        let bottom = ac.available_thrust(&atm, 0.0, 0.0, v);
        assert!((bottom - 0.8 * top).abs() < 1e-6);
        let mid = ac.available_thrust(&atm, 0.5, 0.0, v);
        assert!((mid - 0.5 * (top + bottom)).abs() < 1e-6);
    }

    #[test]
    fn thrust_clamps_out_of_envelope() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let (t, clamped) = ac.available_thrust_checked(&atm, 1.5, 0.0, 80.0);
        assert!(clamped);
        assert_eq!(t, ac.available_thrust(&atm, 1.0, 0.0, 80.0));
        let (t, clamped) = ac.available_thrust_checked(&atm, 0.5, 0.0, 1000.0);
        assert!(clamped);
        assert_eq!(t, 0.0);
    }

    #[test]
    fn thrust_non_increasing_in_altitude() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let mut prev = f64::INFINITY;
        for i in 0..=50 {
            let t = ac.available_thrust(&atm, 0.3, i as f64 * 200.0, 120.0);
            assert!(t <= prev);
            prev = t;
        }
    }

    #[test]
    fn drag_zero_lift_limit() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let q = 0.5 * 1.225 * 100.0 * 100.0;
        let d = ac.drag(&atm, 0.0, 100.0, 0.0).unwrap();
        assert!((d - q * 125.0 * 0.022).abs() < 1e-9);
    }

    #[test]
    fn drag_speed_scaling() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let w = 600_000.0;
        let parts = |v: f64| {
            let c = &ac.flap_schedule[1];
            let qs = 0.5 * 1.225 * v * v * c.wing_area;
            (qs * c.cd0, c.k * w * w / qs)
        };
        let (p1, i1) = parts(80.0);
        let (p2, i2) = parts(160.0);
        assert!((p2 / p1 - 4.0).abs() < 1e-12);
        assert!((i1 / i2 - 4.0).abs() < 1e-12);
        let d1 = ac.drag_in_configuration(&atm, 1, 80.0, w);
        let d2 = ac.drag_in_configuration(&atm, 1, 160.0, w);
        assert!((d1 - (p1 + i1)).abs() < 1e-6);
        assert!((d2 - (p2 + i2)).abs() < 1e-6);
    }

    #[test]
    fn drag_golden_case() {
        // q = 0.5*1.225*90^2 = 4961.25 Pa, qS = 620156.25 N,
        // CL = 686465.5 / 620156.25 = 1.106923..., CD = 0.045 + 0.04*CL^2 = 0.094011...
        // D = qS*CD = 58302.4... N
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let w = 70_000.0 * 9.80665;
        let d = ac.drag(&atm, 0.0, 90.0, w).unwrap();
        let qs = 620_156.25;
        let cl: f64 = 686_465.5 / qs;
        let expected = qs * (0.045 + 0.04 * cl * cl);
        assert!((expected - 58_302.4).abs() < 1.0);
        assert!((d - expected).abs() < 1e-6);
    }

    #[test]
    fn drag_outside_schedule_names_speed() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        let err = ac.drag(&atm, 0.0, 50.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("50"));
        assert!(ac.drag(&atm, 0.0, 170.0, 1.0).is_ok());
        assert!(ac.drag(&atm, 0.0, 170.5, 1.0).is_err());
    }

    #[test]
    fn fuel_flow_idle_and_golden() {
        let ac = synthetic_aircraft();
        assert_eq!(ac.fuel_flow(0.0, 100.0, 0.0), 0.15);
        // 0.15 + 1.2e-5 * 200000 * (1 + 0.001*100) = 0.15 + 2.4*1.1 = 2.79
        assert!((ac.fuel_flow(200_000.0, 100.0, 0.0) - 2.79).abs() < 1e-12);
        let f = [0.0, 50_000.0, 150_000.0].map(|t| ac.fuel_flow(t, 90.0, 500.0));
        assert!(f[0] <= f[1] && f[1] <= f[2]);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let atm = Atmosphere::default();
        let ac = synthetic_aircraft();
        ac.validate(&atm).unwrap();

        let mut gap = ac.clone();
        gap.flap_schedule[1].min_eas = 96.0;
        assert!(gap.validate(&atm).is_err());

        let mut weak = ac.clone();
        weak.max_takeoff_thrust = 10_000.0;
        let err = weak.validate(&atm).unwrap_err();
        assert!(err.to_string().contains("exceed drag"));

        let mut slow = ac;
        slow.v2_plus10 = 60.0;
        assert!(slow.validate(&atm).is_err());
    }

    proptest! {
        #[test]
        fn fuel_flow_monotone_in_thrust(a in 0.0f64..4e5, b in 0.0f64..4e5, v in 0.0f64..250.0, h in 0.0f64..3000.0) {
            let ac = synthetic_aircraft();
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            prop_assert!(ac.fuel_flow(lo, v, h) <= ac.fuel_flow(hi, v, h));
            prop_assert!(ac.fuel_flow(lo, v, h) >= 0.0);
        }
    }
}
