use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::aircraft::load_aircraft;
use super::population::load_population_grid;
use super::{read_text, ScenarioIoError};
use crate::airframe::Atmosphere;
use crate::framework::{split_counts, FlightSchedule, FrameworkError, ModelContext};
use crate::moead::MoeadConfig;
use crate::noise::{LdenSettings, NoiseSettings, OperationCounts, Period};
use crate::trajectory::{BankBand, BankLimitProfile, DepartureSettings, SidDefinition, TrackBounds};
use crate::units::{ft, kt};

/// SHA-256 over every input that changes Step-1 objectives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioHash(pub [u8; 32]);

impl fmt::Display for ScenarioHash {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.0 {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

/// Local clock hours at which each period starts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodDefinition {
    pub day_start_h: f64,
    pub evening_start_h: f64,
    pub night_start_h: f64,
}

impl Default for PeriodDefinition {
    fn default() -> Self {
        Self {
            day_start_h: 7.0,
            evening_start_h: 19.0,
            night_start_h: 23.0,
        }
    }
}

impl PeriodDefinition {
    /// Length of each period in hours.
    pub fn hours(&self) -> [f64; 3] {
        [
            self.evening_start_h - self.day_start_h,
            self.night_start_h - self.evening_start_h,
            24.0 - self.night_start_h + self.day_start_h,
        ]
    }
}

/// A loaded and validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub path: PathBuf,
    pub context: ModelContext,
    pub sids: Vec<SidDefinition>,
    pub schedule: FlightSchedule,
    /// Step-1 design counts per SID, `[type][period]`.
    pub design_counts: Vec<Vec<[u32; 3]>>,
    pub periods: PeriodDefinition,
    pub step1: MoeadConfig,
    pub step2: MoeadConfig,
    pub one_step: MoeadConfig,
    pub hash: ScenarioHash,
}

impl Scenario {
    pub fn sid_index(&self, name: &str) -> Option<usize> {
        self.sids.iter().position(|s| s.name == name)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    name: String,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    atmosphere: Option<AtmosphereFile>,
    grid: GridFile,
    aircraft: Vec<AircraftRef>,
    #[serde(default)]
    periods: PeriodDefinition,
    #[serde(default)]
    noise: NoiseFile,
    #[serde(default)]
    departure: DepartureFile,
    #[serde(default)]
    bank_limit: Option<Vec<BankFile>>,
    sid: Vec<SidFile>,
    #[serde(default)]
    demand: Vec<CountsFile>,
    #[serde(default)]
    route_limit: Vec<CountsFile>,
    #[serde(default)]
    optimizer: OptimizerFile,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AtmosphereFile {
    sea_level_density_kg_m3: f64,
    temperature_lapse_k_per_m: f64,
    sea_level_temperature_k: f64,
    sea_level_pressure_pa: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    population_csv: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct AircraftRef {
    id: String,
    file: PathBuf,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct NoiseFile {
    reference_speed_kt: f64,
    speed_correction_limit_db: f64,
    evening_penalty_db: f64,
    night_penalty_db: f64,
}

impl Default for NoiseFile {
    fn default() -> Self {
        let n = NoiseSettings::default();
        let l = LdenSettings::default();
        Self {
            reference_speed_kt: crate::units::to_kt(n.reference_speed),
            speed_correction_limit_db: n.speed_correction_limit_db,
            evening_penalty_db: l.weights_db[1],
            night_penalty_db: l.weights_db[2],
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields, default)]
struct DepartureFile {
    step_s: f64,
    event_tolerance_s: f64,
    max_flight_time_s: f64,
    max_flight_path_angle_deg: f64,
    segment_max_flight_path_angle_deg: Option<f64>,
    cutback_altitude_ft: f64,
    nadp2_acceleration_share: f64,
    nadp2_climb_share: f64,
}

impl Default for DepartureFile {
    fn default() -> Self {
        let d = DepartureSettings::default();
        Self {
            step_s: d.step_s,
            event_tolerance_s: d.event_tolerance_s,
            max_flight_time_s: d.max_flight_time_s,
            max_flight_path_angle_deg: d.max_flight_path_angle.to_degrees(),
            segment_max_flight_path_angle_deg: None,
            cutback_altitude_ft: crate::units::to_ft(d.cutback_altitude),
            nadp2_acceleration_share: d.nadp2_acceleration_share,
            nadp2_climb_share: d.nadp2_climb_share,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BankFile {
    below_altitude_ft: f64,
    max_bank_deg: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SidFile {
    name: String,
    runway_start_m: [f64; 2],
    /// Counter-clockwise from the +x axis.
    initial_heading_deg: f64,
    #[serde(default = "default_start_ft")]
    start_altitude_ft: f64,
    terminal_fix_m: [f64; 2],
    #[serde(default = "default_terminal_ft")]
    terminal_altitude_ft: f64,
    #[serde(default = "default_terminal_kt")]
    terminal_eas_kt: f64,
    terminal_point: String,
    capacity: u32,
    #[serde(default)]
    design_flights: Option<u32>,
    #[serde(default)]
    track_bounds: Option<BoundsFile>,
}

fn default_start_ft() -> f64 {
    35.0
}

fn default_terminal_ft() -> f64 {
    6000.0
}

fn default_terminal_kt() -> f64 {
    250.0
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct BoundsFile {
    first_leg_m: [f64; 2],
    mid_heading_deg: [f64; 2],
    second_leg_m: [f64; 2],
    turn_radius_m: [f64; 2],
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CountsFile {
    #[serde(default)]
    terminal_point: Option<String>,
    #[serde(default)]
    sid: Option<String>,
    aircraft: String,
    #[serde(default)]
    day: u32,
    #[serde(default)]
    evening: u32,
    #[serde(default)]
    night: u32,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct OptimizerFile {
    seed: Option<u64>,
    workers: Option<usize>,
    #[serde(default)]
    step1: MoeadConfig,
    #[serde(default)]
    step2: MoeadConfig,
    #[serde(default)]
    one_step: MoeadConfig,
}

/// Loads a scenario and everything it references; relative paths resolve
/// against the scenario file's directory.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioIoError> {
    parse_scenario(&read_text(path)?, path)
}

pub fn parse_scenario(text: &str, path: &Path) -> Result<Scenario, ScenarioIoError> {
    let f: ScenarioFile = toml::from_str(text).map_err(|e| ScenarioIoError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let _ = f.description;
    let invalid = |field: &str, rule: String| ScenarioIoError::invalid(path, field, rule);
    let base = path.parent().unwrap_or(Path::new("."));

    let atmosphere = match &f.atmosphere {
        Some(a) => Atmosphere {
            sea_level_density: a.sea_level_density_kg_m3,
            temperature_lapse: a.temperature_lapse_k_per_m,
            sea_level_temperature: a.sea_level_temperature_k,
            sea_level_pressure: a.sea_level_pressure_pa,
        },
        None => Atmosphere::default(),
    };
    atmosphere.validate().map_err(|e| invalid("atmosphere", e.to_string()))?;

    let hours = f.periods.hours();
    if hours.iter().any(|h| !(*h > 0.0)) || f.periods.day_start_h < 0.0 || f.periods.night_start_h > 24.0 {
        return Err(invalid("periods", "period start hours must increase within one day".into()));
    }

    let mut fleet = Vec::with_capacity(f.aircraft.len());
    let mut type_index = HashMap::new();
    for (i, a) in f.aircraft.iter().enumerate() {
        if type_index.insert(a.id.clone(), i).is_some() {
            return Err(invalid("aircraft", format!("duplicate aircraft id '{}'", a.id)));
        }
        fleet.push(load_aircraft(&base.join(&a.file), &atmosphere)?);
    }
    if fleet.is_empty() {
        return Err(invalid("aircraft", "at least one aircraft type is required".into()));
    }
    let population = load_population_grid(&base.join(&f.grid.population_csv))?;

    let d = &f.departure;
    let departure = DepartureSettings {
        step_s: d.step_s,
        event_tolerance_s: d.event_tolerance_s,
        max_flight_time_s: d.max_flight_time_s,
        max_flight_path_angle: d.max_flight_path_angle_deg.to_radians(),
        cutback_altitude: ft(d.cutback_altitude_ft),
        nadp2_acceleration_share: d.nadp2_acceleration_share,
        nadp2_climb_share: d.nadp2_climb_share,
    };
    departure.validate().map_err(|e| invalid("departure", e))?;
    let segment_gamma_max = d
        .segment_max_flight_path_angle_deg
        .map_or(departure.max_flight_path_angle, f64::to_radians);
    if !(segment_gamma_max > 0.0 && segment_gamma_max <= departure.max_flight_path_angle) {
        return Err(invalid(
            "departure.segment_max_flight_path_angle_deg",
            "must be positive and no larger than max_flight_path_angle_deg".into(),
        ));
    }
    let bank_limits = match &f.bank_limit {
        Some(bands) => BankLimitProfile {
            bands: bands
                .iter()
                .map(|b| BankBand {
                    upper_altitude: ft(b.below_altitude_ft),
                    max_bank: b.max_bank_deg.to_radians(),
                })
                .collect(),
        },
        None => BankLimitProfile::default(),
    };
    bank_limits.validate().map_err(|e| invalid("bank_limit", e.to_string()))?;
    let n = &f.noise;
    let noise = NoiseSettings {
        reference_speed: kt(n.reference_speed_kt),
        speed_correction_limit_db: n.speed_correction_limit_db,
    };
    if !(noise.reference_speed > 0.0 && noise.speed_correction_limit_db >= 0.0) {
        return Err(invalid("noise", "reference speed must be positive and the correction limit non-negative".into()));
    }
    let lden = LdenSettings {
        weights_db: [0.0, n.evening_penalty_db, n.night_penalty_db],
        ..LdenSettings::default()
    };

    let mut sids = Vec::with_capacity(f.sid.len());
    let mut terminal_points: Vec<String> = Vec::new();
    let mut route_terminal = Vec::new();
    for (k, s) in f.sid.iter().enumerate() {
        if f.sid[..k].iter().any(|o| o.name == s.name) {
            return Err(invalid("sid", format!("duplicate SID name '{}'", s.name)));
        }
        let mut sid = SidDefinition::new(
            s.name.clone(),
            (s.runway_start_m[0], s.runway_start_m[1]),
            s.initial_heading_deg.to_radians(),
            (s.terminal_fix_m[0], s.terminal_fix_m[1]),
            s.terminal_point.clone(),
        );
        sid.start_altitude = ft(s.start_altitude_ft);
        sid.terminal_altitude = ft(s.terminal_altitude_ft);
        sid.terminal_eas = kt(s.terminal_eas_kt);
        if let Some(b) = &s.track_bounds {
            sid.track_bounds = TrackBounds {
                l1: (b.first_leg_m[0], b.first_leg_m[1]),
                psi_mid: (b.mid_heading_deg[0].to_radians(), b.mid_heading_deg[1].to_radians()),
                l2: (b.second_leg_m[0], b.second_leg_m[1]),
                radius: (b.turn_radius_m[0], b.turn_radius_m[1]),
            };
        }
        sid.validate().map_err(|e| invalid(&format!("sid[{k}]"), e.to_string()))?;
        let t = match terminal_points.iter().position(|p| *p == s.terminal_point) {
            Some(t) => t,
            None => {
                terminal_points.push(s.terminal_point.clone());
                terminal_points.len() - 1
            }
        };
        route_terminal.push(t);
        sids.push(sid);
    }
    if sids.is_empty() {
        return Err(invalid("sid", "at least one SID is required".into()));
    }

    let types = fleet.len();
    let aircraft_of = |field: &str, id: &str| {
        type_index
            .get(id)
            .copied()
            .ok_or_else(|| invalid(field, format!("unknown aircraft '{id}'")))
    };
    let mut totals = vec![vec![[0u32; 3]; types]; terminal_points.len()];
    for (j, dm) in f.demand.iter().enumerate() {
        let field = format!("demand[{j}]");
        let tp = dm
            .terminal_point
            .as_deref()
            .ok_or_else(|| invalid(&field, "terminal_point is required".into()))?;
        let s = terminal_points
            .iter()
            .position(|p| p == tp)
            .ok_or_else(|| invalid(&field, format!("unknown terminal point '{tp}'")))?;
        let i = aircraft_of(&field, &dm.aircraft)?;
        for (p, v) in [dm.day, dm.evening, dm.night].into_iter().enumerate() {
            totals[s][i][p] += v;
        }
    }
    let capacities: Vec<u32> = f.sid.iter().map(|s| s.capacity).collect();
    let mut upper_bounds = OperationCounts::zeros(sids.len(), types);
    for (k, &c) in capacities.iter().enumerate() {
        for i in 0..types {
            for p in Period::ALL {
                upper_bounds.set(k, i, p, c);
            }
        }
    }
    for (j, rl) in f.route_limit.iter().enumerate() {
        let field = format!("route_limit[{j}]");
        let name = rl.sid.as_deref().ok_or_else(|| invalid(&field, "sid is required".into()))?;
        let k = sids
            .iter()
            .position(|s| s.name == name)
            .ok_or_else(|| invalid(&field, format!("unknown SID '{name}'")))?;
        let i = aircraft_of(&field, &rl.aircraft)?;
        for (p, v) in Period::ALL.into_iter().zip([rl.day, rl.evening, rl.night]) {
            upper_bounds.set(k, i, p, v);
        }
    }
    let schedule = FlightSchedule {
        terminal_points,
        route_terminal,
        totals,
        capacities,
        upper_bounds,
    };
    schedule.validate().map_err(|e| match e {
        FrameworkError::InfeasibleSchedule { constraint } => ScenarioIoError::InfeasibleSchedule {
            path: path.to_path_buf(),
            constraint,
        },
        other => invalid("schedule", other.to_string()),
    })?;
    let design_counts = f
        .sid
        .iter()
        .enumerate()
        .map(|(k, s)| match s.design_flights {
            Some(n) => split_counts(n, &schedule.totals[schedule.route_terminal[k]]),
            None => schedule.design_counts(k),
        })
        .collect();

    let mut configs = [f.optimizer.step1, f.optimizer.step2, f.optimizer.one_step];
    for (cfg, name) in configs.iter_mut().zip(["step1", "step2", "one_step"]) {
        if let Some(seed) = f.optimizer.seed {
            cfg.rng_seed = seed;
        }
        if let Some(w) = f.optimizer.workers {
            cfg.workers = w;
        }
        cfg.validate().map_err(|e| invalid(&format!("optimizer.{name}"), e.to_string()))?;
    }
    let [step1, step2, one_step] = configs;

    let context = ModelContext {
        atmosphere,
        fleet,
        population,
        departure,
        noise,
        lden,
        bank_limits,
        segment_gamma_max,
    };
    let hash = scenario_hash(&context, &sids);
    Ok(Scenario {
        name: f.name,
        path: path.to_path_buf(),
        context,
        sids,
        schedule,
        design_counts,
        periods: f.periods,
        step1,
        step2,
        one_step,
        hash,
    })
}

/// Hash of the model inputs and SID definitions. Flight counts are not
/// included: archives record their own design counts.
pub fn scenario_hash(ctx: &ModelContext, sids: &[SidDefinition]) -> ScenarioHash {
    #[derive(Serialize)]
    struct Hashed<'a> {
        atmosphere: &'a Atmosphere,
        fleet: &'a [crate::airframe::AircraftType],
        population: &'a crate::noise::PopulationGrid,
        departure: &'a DepartureSettings,
        noise: &'a NoiseSettings,
        lden: &'a LdenSettings,
        bank_limits: &'a BankLimitProfile,
        segment_gamma_max: f64,
        sids: &'a [SidDefinition],
    }
    let bytes = serde_json::to_vec(&Hashed {
        atmosphere: &ctx.atmosphere,
        fleet: &ctx.fleet,
        population: &ctx.population,
        departure: &ctx.departure,
        noise: &ctx.noise,
        lden: &ctx.lden,
        bank_limits: &ctx.bank_limits,
        segment_gamma_max: ctx.segment_gamma_max,
        sids,
    })
    .expect("model inputs serialize");
    ScenarioHash(Sha256::digest(&bytes).into())
}
