//! Searches for revenue-neutral prices that lower the utility's cost of
//! serving an optimally responding customer. Uses a one-day horizon and a
//! coarse grid to stay quick.
//!
//! `cargo run --release --example optimize_prices`

use std::path::Path;

use thermostat_core::scenario::{Scenario, ScenarioConfig};

fn main() -> thermostat_core::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs/srp.toml");
    let overrides = [("days", "1"), ("grid_nodes", "11"), ("du", "0.5")]
        .map(|(k, v)| (k.to_string(), v.to_string()));
    let scenario = Scenario::load(ScenarioConfig::load(&path, &overrides)?)?;
    let res = scenario.optimize_prices()?;

    let show = |label: &str, p: thermostat_core::Prices| {
        println!(
            "{label}: on {:.5} $/kWh, off {:.5} $/kWh, demand {:.3} $/kW",
            p.on, p.off, p.demand
        )
    };
    show("start", res.initial_scaled_prices.prices());
    show("final", res.optimal_prices.prices());
    println!(
        "production cost ${:.3} -> ${:.3} in {} moves ({} evaluations); peak {:.3} kW",
        res.initial_cost, res.production_cost, res.iterations, res.evaluations, res.demand_peak_kw
    );
    println!("revenue gap {:.2e}", res.revenue_gap());
    Ok(())
}
