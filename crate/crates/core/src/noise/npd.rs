use serde::{Deserialize, Serialize};

use super::NoiseError;

/// Air-to-ground lateral attenuation in the SAE AIR-1751 form:
/// `Λ(β, ℓ) = G(ℓ) · Λ(β) / Λ∞`, with
/// `G(ℓ) = min(g·(1 − e^(−c·ℓ)), Λ∞)` and
/// `Λ(β) = a − b·β + e·exp(−f·β)` for `β ≤ cutoff`, zero above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LateralAttenuation {
    pub ground_gain_db: f64,
    /// 1/m
    pub ground_decay: f64,
    /// dB, attenuation at ground level far from the track.
    pub ground_cap_db: f64,
    pub elevation_offset_db: f64,
    /// dB/deg
    pub elevation_slope_db: f64,
    pub elevation_exp_db: f64,
    /// 1/deg
    pub elevation_exp_rate: f64,
    pub cutoff_deg: f64,
}

impl Default for LateralAttenuation {
    fn default() -> Self {
        Self {
            ground_gain_db: 11.83,
            ground_decay: 0.00274,
            ground_cap_db: 10.86,
            elevation_offset_db: 1.137,
            elevation_slope_db: 0.0229,
            elevation_exp_db: 9.72,
            elevation_exp_rate: 0.142,
            cutoff_deg: 50.0,
        }
    }
}

impl LateralAttenuation {
    /// Attenuation in dB for elevation angle `beta_deg` and lateral distance `lateral_m`.
    pub fn attenuation(&self, beta_deg: f64, lateral_m: f64) -> f64 {
        if beta_deg > self.cutoff_deg || lateral_m <= 0.0 {
            return 0.0;
        }
        let ground = (self.ground_gain_db * (1.0 - (-self.ground_decay * lateral_m).exp()))
            .min(self.ground_cap_db);
        let beta = beta_deg.max(0.0);
        let air = (self.elevation_offset_db - self.elevation_slope_db * beta
            + self.elevation_exp_db * (-self.elevation_exp_rate * beta).exp())
        .max(0.0);
        ground * air / self.ground_cap_db
    }
}

/// Noise-power-distance table: SEL (dBA) over total thrust × slant distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NpdTable {
    /// N, strictly ascending
    pub thrust: Vec<f64>,
    /// m, strictly ascending
    pub distance: Vec<f64>,
    /// `sel[thrust index][distance index]`, dBA
    pub sel: Vec<Vec<f64>>,
    #[serde(default)]
    pub lateral: LateralAttenuation,
}

/// Result of an NPD lookup.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NpdLookup {
    pub sel: f64,
    /// The distance fell below the first knot and was clamped.
    pub clamped: bool,
}

impl NpdTable {
    pub fn validate(&self) -> Result<(), NoiseError> {
        let bad = |rule: &str| Err(NoiseError::InvalidNpd(rule.to_string()));
        if self.thrust.len() < 2 || self.distance.len() < 2 {
            return bad("needs at least two thrust and two distance knots");
        }
        if self.thrust.iter().any(|&t| t <= 0.0) || self.distance.iter().any(|&d| d <= 0.0) {
            return bad("knots must be positive");
        }
        if self.thrust.windows(2).any(|w| w[1] <= w[0]) {
            return bad("thrust knots must be strictly ascending");
        }
        if self.distance.windows(2).any(|w| w[1] <= w[0]) {
            return bad("distance knots must be strictly ascending");
        }
        if self.sel.len() != self.thrust.len()
            || self.sel.iter().any(|row| row.len() != self.distance.len())
        {
            return bad("SEL matrix shape does not match the knots");
        }
        if self.sel.iter().flatten().any(|v| !v.is_finite()) {
            return bad("SEL values must be finite");
        }
        for row in &self.sel {
            if row.windows(2).any(|w| w[1] >= w[0]) {
                return bad("SEL must strictly decrease with distance");
            }
        }
        for pair in self.sel.windows(2) {
            if pair[0].iter().zip(&pair[1]).any(|(lo, hi)| hi < lo) {
                return bad("SEL must not decrease with thrust");
            }
        }
        Ok(())
    }

    /// Bilinear interpolation in (ln thrust, ln distance).
    ///
    /// Thrust is clamped to the table. Distances below the first knot are clamped
    /// (and flagged); beyond the last knot the last interval is extrapolated.
    pub fn lookup(&self, thrust: f64, distance: f64) -> NpdLookup {
        self.prepared().lookup(thrust, distance)
    }

    /// Table with log-knots precomputed, for repeated lookups.
    pub fn prepared(&self) -> PreparedNpd<'_> {
        PreparedNpd {
            ln_thrust: self.thrust.iter().map(|t| t.ln()).collect(),
            ln_distance: self.distance.iter().map(|d| d.ln()).collect(),
            table: self,
        }
    }

    #[cfg(test)]
    pub(crate) fn synthetic_for_tests() -> Self {
        let thrust = vec![40_000.0, 80_000.0, 160_000.0, 320_000.0];
        let distance = vec![200.0, 400.0, 800.0, 1600.0, 3200.0, 6400.0, 12_800.0];
        let sel = thrust
            .iter()
            .map(|&t: &f64| {
                distance
                    .iter()
                    .enumerate()
                    .map(|(j, _)| 95.0 + 10.0 * (t / 160_000.0).log10() - 7.0 * j as f64)
                    .collect()
            })
            .collect();
        Self {
            thrust,
            distance,
            sel,
            lateral: LateralAttenuation::default(),
        }
    }
}

pub struct PreparedNpd<'a> {
    ln_thrust: Vec<f64>,
    ln_distance: Vec<f64>,
    table: &'a NpdTable,
}

impl PreparedNpd<'_> {
    pub fn lookup(&self, thrust: f64, distance: f64) -> NpdLookup {
        let t_min = self.table.thrust[0];
        let t_max = *self.table.thrust.last().unwrap();
        let d_min = self.table.distance[0];
        let t = thrust.clamp(t_min, t_max).ln();
        let clamped = distance < d_min;
        let d = distance.max(d_min).ln();

        let (ti, tw) = bracket(&self.ln_thrust, t, false);
        let (di, dw) = bracket(&self.ln_distance, d, true);
        let at = |row: &Vec<f64>| row[di] + dw * (row[di + 1] - row[di]);
        let lo = at(&self.table.sel[ti]);
        let hi = at(&self.table.sel[ti + 1]);
        NpdLookup {
            sel: lo + tw * (hi - lo),
            clamped,
        }
    }

    pub fn lateral(&self) -> &LateralAttenuation {
        &self.table.lateral
    }
}

/// Interval index and weight of `x` within ascending `knots` (both in log space).
fn bracket(knots: &[f64], x: f64, extrapolate_high: bool) -> (usize, f64) {
    let n = knots.len();
    let mut i = 0;
    while i + 2 < n && x > knots[i + 1] {
        i += 1;
    }
    let mut w = (x - knots[i]) / (knots[i + 1] - knots[i]);
    if !extrapolate_high {
        w = w.min(1.0);
    }
    (i, w.max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_values_are_exact() {
        let npd = NpdTable::synthetic_for_tests();
        let l = npd.lookup(160_000.0, 800.0);
        assert!((l.sel - 81.0).abs() < 1e-12);
        assert!(!l.clamped);
    }

    #[test]
    fn doubling_distance_between_knots_drops_one_decrement() {
        let npd = NpdTable::synthetic_for_tests();
        // 7 dB per doubling in the synthetic table; interpolation is linear in ln d.
        let a = npd.lookup(100_000.0, 300.0).sel;
        let b = npd.lookup(100_000.0, 600.0).sel;
        assert!((a - b - 7.0).abs() < 1e-9);
    }

    #[test]
    fn below_table_distance_is_clamped_and_flagged() {
        let npd = NpdTable::synthetic_for_tests();
        let l = npd.lookup(160_000.0, 10.0);
        assert!(l.clamped);
        assert!((l.sel - 95.0).abs() < 1e-12);
    }

    #[test]
    fn beyond_last_knot_extrapolates() {
        let npd = NpdTable::synthetic_for_tests();
        let l = npd.lookup(160_000.0, 25_600.0);
        assert!((l.sel - (95.0 - 7.0 * 7.0)).abs() < 1e-9);
    }

    #[test]
    fn thrust_interpolates_in_log_thrust() {
        let npd = NpdTable::synthetic_for_tests();
        let geometric_mid = (80_000.0f64 * 160_000.0).sqrt();
        let v = npd.lookup(geometric_mid, 800.0).sel;
        let lo = npd.lookup(80_000.0, 800.0).sel;
        let hi = npd.lookup(160_000.0, 800.0).sel;
        assert!((v - 0.5 * (lo + hi)).abs() < 1e-9);
        assert_eq!(npd.lookup(1.0, 800.0).sel, npd.lookup(40_000.0, 800.0).sel);
    }

    #[test]
    fn validation_checks_monotonicity() {
        let mut npd = NpdTable::synthetic_for_tests();
        npd.validate().unwrap();
        npd.sel[0][3] = npd.sel[0][2] + 1.0;
        assert!(npd.validate().is_err());
        let mut npd = NpdTable::synthetic_for_tests();
        npd.sel[1][0] = npd.sel[0][0] - 1.0;
        assert!(npd.validate().is_err());
    }

    #[test]
    fn lateral_attenuation_shape() {
        let lat = LateralAttenuation::default();
        assert_eq!(lat.attenuation(90.0, 300.0), 0.0);
        assert_eq!(lat.attenuation(0.0, 0.0), 0.0);
        // Grazing incidence far away approaches the ground-level cap.
        let far = lat.attenuation(0.0, 5000.0);
        assert!((far - 10.857).abs() < 1e-3, "{far}");
        // Higher elevation always attenuates less.
        assert!(lat.attenuation(10.0, 2000.0) > lat.attenuation(30.0, 2000.0));
        assert!(lat.attenuation(50.0, 2000.0).abs() < 1e-2);
    }
}
