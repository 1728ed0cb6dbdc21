//! Fixtures shared by the benchmarks.

use std::path::PathBuf;

use sidplan::scenario_io::{load_scenario, Scenario};

/// The shipped demo scenario.
pub fn demo_scenario() -> Scenario {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/demo/scenario.toml");
    load_scenario(&path).expect("demo scenario loads")
}
