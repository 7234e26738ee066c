//! Energy and demand charges of a power profile, and what it costs to produce.
//!
//! `cargo run --example tariff_bill`

use thermostat_core::tariff::{production_cost, total_bill};
use thermostat_core::{MarginalCosts, Prices, TariffSchedule};

fn main() -> thermostat_core::Result<()> {
    // two days, on-peak from noon to 7 pm
    let tariff = TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 12.0, 19.0, 1.0, 48)?;
    let flat = vec![6000.0; 48];
    let peaky: Vec<f64> = (0..48)
        .map(|k| if tariff.is_on_peak(k) { 9000.0 } else { 4000.0 })
        .collect();
    let costs = MarginalCosts::new(0.0814, 59.76)?;

    for (name, powers) in [("flat", &flat), ("peaky", &peaky)] {
        let bill = total_bill(&tariff, powers)?;
        println!(
            "{name:>6}: energy ${:.3}  demand ${:.3}  total ${:.3}  peak {} kW  production ${:.2}",
            bill.energy_cost,
            bill.demand_cost,
            bill.total,
            bill.peak_kw,
            production_cost(&costs, &tariff, powers)?
        );
    }
    Ok(())
}
