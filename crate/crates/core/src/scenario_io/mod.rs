//! Scenario, aircraft and population loaders, route archive files and exports.
//!
//! Text inputs are TOML with the unit in every physical field name
//! (`_m`, `_ft`, `_kt`, `_deg`, `_kg`, `_n`, ...). Every loader either returns
//! a validated object or an error naming the file, the field and the rule.
//! Every writer goes through [`write_atomic`], so an interrupted run never
//! leaves a half-written output behind.

mod aircraft;
mod archive;
mod export;
mod population;
mod scenario;

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

pub use aircraft::{load_aircraft, parse_aircraft};
pub use archive::{load_archive, read_archive, save_archive, write_archive, ArchiveFile, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use export::{
    allocation_table_csv, front_csv, front_rows_for_allocation, front_rows_for_archive, lden_contour_ascii,
    profiles_csv, tracks_geojson, FrontRow,
};
pub use population::{load_population_grid, parse_population_csv};
pub use scenario::{load_scenario, parse_scenario, scenario_hash, PeriodDefinition, Scenario, ScenarioHash};

#[derive(Debug, Error)]
pub enum ScenarioIoError {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {message}", path.display())]
    Parse { path: PathBuf, message: String },
    #[error("{}: field '{field}': {rule}", path.display())]
    Invalid { path: PathBuf, field: String, rule: String },
    #[error("{}: flight schedule is infeasible: {constraint}", path.display())]
    InfeasibleSchedule { path: PathBuf, constraint: String },
    #[error("{}: not a readable route archive: {reason}", path.display())]
    ArchiveFormat { path: PathBuf, reason: String },
    #[error("{}: archive was built for scenario {found}, current scenario is {expected}", path.display())]
    HashMismatch { path: PathBuf, expected: String, found: String },
}

impl ScenarioIoError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub(crate) fn invalid(path: &Path, field: impl Into<String>, rule: impl Into<String>) -> Self {
        Self::Invalid {
            path: path.to_path_buf(),
            field: field.into(),
            rule: rule.into(),
        }
    }
}

/// Writes `bytes` to a temporary file next to `path` and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), ScenarioIoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| ScenarioIoError::io(path, e))?;
    tmp.write_all(bytes).map_err(|e| ScenarioIoError::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| ScenarioIoError::io(path, e))?;
    tmp.persist(path).map_err(|e| ScenarioIoError::io(path, e.error))?;
    Ok(())
}

pub(crate) fn read_file(path: &Path) -> Result<Vec<u8>, ScenarioIoError> {
    std::fs::read(path).map_err(|e| ScenarioIoError::io(path, e))
}

pub(crate) fn read_text(path: &Path) -> Result<String, ScenarioIoError> {
    std::fs::read_to_string(path).map_err(|e| ScenarioIoError::io(path, e))
}
