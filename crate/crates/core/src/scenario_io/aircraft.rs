use std::path::Path;

use serde::Deserialize;

use super::{read_text, ScenarioIoError};
use crate::airframe::{AircraftType, Atmosphere, FlapConfiguration, FuelFlowModel, ThrustLapse};
use crate::noise::{LateralAttenuation, NpdTable};
use crate::units::kt;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AircraftFile {
    name: String,
    reference_mass_kg: f64,
    max_takeoff_thrust_n: f64,
    climb_thrust_fraction: f64,
    v2_plus10_kt: f64,
    thrust_lapse: LapseFile,
    fuel_flow: FuelFlowFile,
    flap: Vec<FlapFile>,
    npd: NpdFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LapseFile {
    density_exponent: f64,
    speed_coefficient_per_m_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FuelFlowFile {
    idle_kg_s: f64,
    thrust_coefficient_kg_per_n_s: f64,
    speed_coefficient_per_m_s: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct FlapFile {
    name: String,
    min_eas_kt: f64,
    max_eas_kt: f64,
    wing_area_m2: f64,
    cd0: f64,
    k: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct NpdFile {
    thrust_n: Vec<f64>,
    distance_m: Vec<f64>,
    /// One row per thrust level.
    sel_db: Vec<Vec<f64>>,
    #[serde(default)]
    lateral: Option<LateralAttenuation>,
}

/// Reads and validates an aircraft performance file.
pub fn load_aircraft(path: &Path, atm: &Atmosphere) -> Result<AircraftType, ScenarioIoError> {
    parse_aircraft(&read_text(path)?, path, atm)
}

pub fn parse_aircraft(text: &str, path: &Path, atm: &Atmosphere) -> Result<AircraftType, ScenarioIoError> {
    let f: AircraftFile = toml::from_str(text).map_err(|e| ScenarioIoError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let ac = AircraftType {
        name: f.name,
        reference_mass: f.reference_mass_kg,
        max_takeoff_thrust: f.max_takeoff_thrust_n,
        climb_thrust_fraction: f.climb_thrust_fraction,
        thrust_lapse: ThrustLapse {
            density_exponent: f.thrust_lapse.density_exponent,
            speed_coefficient: f.thrust_lapse.speed_coefficient_per_m_s,
        },
        flap_schedule: f
            .flap
            .into_iter()
            .map(|c| FlapConfiguration {
                name: c.name,
                min_eas: kt(c.min_eas_kt),
                max_eas: kt(c.max_eas_kt),
                wing_area: c.wing_area_m2,
                cd0: c.cd0,
                k: c.k,
            })
            .collect(),
        fuel_flow_model: FuelFlowModel {
            idle: f.fuel_flow.idle_kg_s,
            thrust_coefficient: f.fuel_flow.thrust_coefficient_kg_per_n_s,
            speed_coefficient: f.fuel_flow.speed_coefficient_per_m_s,
        },
        v2_plus10: kt(f.v2_plus10_kt),
        npd_table: NpdTable {
            thrust: f.npd.thrust_n,
            distance: f.npd.distance_m,
            sel: f.npd.sel_db,
            lateral: f.npd.lateral.unwrap_or_default(),
        },
    };
    ac.validate(atm)
        .map_err(|e| ScenarioIoError::invalid(path, "aircraft", e.to_string()))?;
    Ok(ac)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) const SAMPLE: &str = r#"
name = "TWIN"
reference_mass_kg = 70000
max_takeoff_thrust_n = 240000
climb_thrust_fraction = 0.8
v2_plus10_kt = 160

[thrust_lapse]
density_exponent = 0.75
speed_coefficient_per_m_s = 0.002

[fuel_flow]
idle_kg_s = 0.15
thrust_coefficient_kg_per_n_s = 1.2e-5
speed_coefficient_per_m_s = 0.001

[[flap]]
name = "takeoff"
min_eas_kt = 136
max_eas_kt = 185
wing_area_m2 = 125
cd0 = 0.045
k = 0.04

[[flap]]
name = "clean"
min_eas_kt = 185
max_eas_kt = 330
wing_area_m2 = 125
cd0 = 0.022
k = 0.045

[npd]
thrust_n = [40000, 120000, 240000]
distance_m = [200, 1000, 4000, 16000]
sel_db = [
    [88, 78, 68, 55],
    [94, 84, 74, 61],
    [99, 89, 79, 66],
]
"#;

    #[test]
    fn sample_file_loads_with_unit_conversion() {
        let ac = parse_aircraft(SAMPLE, Path::new("twin.toml"), &Atmosphere::default()).unwrap();
        assert_eq!(ac.name, "TWIN");
        assert!((ac.v2_plus10 - 160.0 * 1852.0 / 3600.0).abs() < 1e-12);
        assert_eq!(ac.flap_schedule.len(), 2);
        assert_eq!(ac.npd_table.lateral, LateralAttenuation::default());
    }

    #[test]
    fn unknown_field_is_a_parse_error_with_location() {
        let text = SAMPLE.replace("climb_thrust_fraction", "climb_fraction");
        match parse_aircraft(&text, Path::new("twin.toml"), &Atmosphere::default()) {
            Err(ScenarioIoError::Parse { message, .. }) => assert!(message.contains("climb_fraction"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn invalid_model_names_file_and_rule() {
        let text = SAMPLE.replace("reference_mass_kg = 70000", "reference_mass_kg = -1");
        let err = parse_aircraft(&text, Path::new("twin.toml"), &Atmosphere::default()).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("twin.toml") && msg.contains("TWIN"), "{msg}");
    }
}
