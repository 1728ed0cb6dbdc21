use sidplan::framework::FrameworkError;
use sidplan::scenario_io::ScenarioIoError;

pub const USAGE: u8 = 2;
pub const INVALID: u8 = 3;
pub const INFEASIBLE: u8 = 4;
pub const EMPTY_ARCHIVE: u8 = 5;
pub const IO: u8 = 6;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

impl From<ScenarioIoError> for CliError {
    fn from(e: ScenarioIoError) -> Self {
        let code = match e {
            ScenarioIoError::Io { .. } => IO,
            ScenarioIoError::InfeasibleSchedule { .. } => INFEASIBLE,
            ScenarioIoError::Parse { .. }
            | ScenarioIoError::Invalid { .. }
            | ScenarioIoError::ArchiveFormat { .. }
            | ScenarioIoError::HashMismatch { .. } => INVALID,
        };
        Self::new(code, e.to_string())
    }
}

impl From<FrameworkError> for CliError {
    fn from(e: FrameworkError) -> Self {
        let code = match e {
            FrameworkError::EmptyArchive { .. } => EMPTY_ARCHIVE,
            FrameworkError::InfeasibleSchedule { .. } => INFEASIBLE,
            FrameworkError::Moead(_) => USAGE,
            _ => INVALID,
        };
        Self::new(code, e.to_string())
    }
}
