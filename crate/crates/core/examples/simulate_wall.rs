//! Forward simulation of the wall model under a fixed set-point schedule.
//!
//! `cargo run --example simulate_wall`

use thermostat_core::thermal::{simulate, BuildingParams, ExteriorTrace, WallState};

fn main() -> thermostat_core::Result<()> {
    let params = BuildingParams::reference(3600.0)?;
    println!(
        "M = {}, dx = {} m, stability ratio {:.4}, surface conductance {} W/K",
        params.m,
        params.dx,
        params.stability_ratio(),
        params.surface_conductance()
    );

    // a hot afternoon: 30 °C rising to 42 °C and back over 24 h
    let trace = ExteriorTrace::new(
        (0..24)
            .map(|h| 36.0 + 6.0 * ((h as f64 - 16.0) * std::f64::consts::PI / 12.0).cos())
            .collect(),
    )?;
    let controls: Vec<f64> = (0..24)
        .map(|h| if (9..12).contains(&h) { 22.0 } else { 28.0 })
        .collect();
    let traj = simulate(
        &params,
        &WallState::uniform(params.m, 27.0),
        &controls,
        &trace,
    )?;

    println!("hour  T_e    u     g_kW   wall");
    for (k, g) in traj.powers.iter().enumerate() {
        let wall: Vec<String> = traj.states[k]
            .temps()
            .iter()
            .map(|t| format!("{t:.2}"))
            .collect();
        println!(
            "{k:>4}  {:.1}  {:.1}  {:>6.3}  [{}]",
            trace.temps()[k],
            controls[k],
            g / 1000.0,
            wall.join(", ")
        );
    }

    // a step twice as long breaks the explicit scheme
    match BuildingParams::reference(7200.0) {
        Err(e) => println!("dt = 2 h: {e}"),
        Ok(_) => println!("dt = 2 h unexpectedly accepted"),
    }
    Ok(())
}
