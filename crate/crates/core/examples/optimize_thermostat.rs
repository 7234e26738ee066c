//! Optimal set-points for one hot day by dynamic programming over the wall
//! state, with the on-peak power cap chosen to minimize the whole bill.
//!
//! `cargo run --release --example optimize_thermostat`

use thermostat_core::dp::{
    ComfortBand, ControlCandidates, GammaSearchConfig, GridSpec, UserProblem,
};
use thermostat_core::thermal::{BuildingParams, ExteriorTrace, WallState};
use thermostat_core::{Prices, TariffSchedule};

fn main() -> thermostat_core::Result<()> {
    let band = ComfortBand::new(22.0, 28.0)?;
    let problem = UserProblem::new(
        BuildingParams::reference(3600.0)?,
        TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 12.0, 19.0, 1.0, 24)?,
        ExteriorTrace::new(
            (0..24)
                .map(|h| 36.0 + 7.0 * ((h as f64 - 16.0) * std::f64::consts::PI / 12.0).cos())
                .collect(),
        )?,
        band,
        GridSpec::around_band(&band, 2.0, 21),
        ControlCandidates::uniform(0.25),
    )?;
    let initial = WallState::uniform(3, 28.0);
    let search = GammaSearchConfig::default();

    let bis = problem.gamma_bisection(&search, &initial)?;
    println!(
        "smallest feasible cap {:.1} W after {} halvings, bracket ({:.1}, {:.1}]",
        bis.gamma_min, bis.iterations, bis.bracket.0, bis.bracket.1
    );

    let sol = problem.solve(&search, &initial)?;
    println!(
        "chosen cap {:.1} W ({} mode, {} DP solves), grid value ${:.4}",
        sol.gamma, sol.mode, sol.solves, sol.value
    );
    let bill = sol.rollout.bill;
    println!(
        "realized bill ${:.4} = energy ${:.4} + demand ${:.4}; peak {:.3} kW",
        bill.total, bill.energy_cost, bill.demand_cost, bill.peak_kw
    );
    let schedule: Vec<String> = sol
        .rollout
        .controls
        .iter()
        .map(|u| format!("{u}"))
        .collect();
    println!("set-points: {}", schedule.join(" "));
    Ok(())
}
