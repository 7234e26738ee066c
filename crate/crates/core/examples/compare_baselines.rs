//! Runs the bundled three-day scenario with the optimal, constant and
//! precooling schedules and prints the bills side by side.
//!
//! `cargo run --release --example compare_baselines`

use std::path::Path;

use thermostat_core::scenario::{render_report, Scenario, ScenarioConfig};

fn main() -> thermostat_core::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/aps.toml");
    let scenario = Scenario::load(ScenarioConfig::load(&path, &[])?)?;
    let results = scenario.run()?;
    print!("{}", render_report(&scenario.config.name, &results));

    let optimal = &results[0];
    for r in &results[1..] {
        println!(
            "optimal vs {}: {:+.2}%",
            r.strategy,
            100.0 * (optimal.bill.total / r.bill.total - 1.0)
        );
    }
    Ok(())
}
