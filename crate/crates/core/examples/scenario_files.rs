//! Loads an exterior-temperature CSV, runs the baselines and writes the
//! trajectory, summary and report files.
//!
//! `cargo run --example scenario_files -- [OUT_DIR]`

use std::path::{Path, PathBuf};

use thermostat_core::scenario::{
    emit_results, load_exterior_csv, Scenario, ScenarioConfig, Strategy,
};

fn main() -> thermostat_core::Result<()> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out: PathBuf = std::env::args_os()
        .nth(1)
        .map(Into::into)
        .unwrap_or_else(|| std::env::temp_dir().join("thermostat-example"));

    // half-hour steps: the hourly trace is interpolated
    let trace = load_exterior_csv(&root.join("data/phoenix_like.csv"), 0.5, 48)?;
    println!("first hours at 30 min: {:?}", &trace.temps()[..6]);

    let config = ScenarioConfig {
        name: "baselines".into(),
        days: 1,
        strategies: vec![Strategy::Constant, Strategy::Precool],
        ..ScenarioConfig::default()
    };
    let scenario = Scenario::build(
        config,
        load_exterior_csv(&root.join("data/phoenix_like.csv"), 1.0, 24)?,
    )?;
    let results = scenario.run()?;
    for path in emit_results(&scenario.config.name, &results, &out)? {
        println!("wrote {}", path.display());
    }
    Ok(())
}
