use approx::assert_relative_eq;

use super::*;

const HOT: f64 = 40.0;

fn problem(days: usize, t_ext: f64, nodes: usize, du: f64) -> UserProblem {
    let params = BuildingParams::reference(3600.0).unwrap();
    let tariff =
        TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 12.0, 19.0, 1.0, 24 * days).unwrap();
    let band = ComfortBand::new(22.0, 28.0).unwrap();
    UserProblem::new(
        params,
        tariff,
        ExteriorTrace::constant(24 * days, t_ext),
        band,
        GridSpec::around_band(&band, 2.0, nodes),
        ControlCandidates::uniform(du),
    )
    .unwrap()
}

#[test]
fn off_peak_candidates_cover_band() {
    let p = problem(1, HOT, 5, 0.25);
    let w = p.admissible_controls(0, 25.0, 0.0);
    assert_eq!(w.len(), 25);
    assert_eq!(w[0], 22.0);
    assert_eq!(*w.last().unwrap(), 28.0);
    // no cap at all leaves on-peak steps unrestricted
    assert_eq!(p.admissible_controls(12, 25.0, f64::INFINITY), w);
}

#[test]
fn on_peak_cap_adds_boundary_setpoint() {
    let p = problem(1, HOT, 5, 0.25);
    let w = p.admissible_controls(12, 25.0, 10_000.0);
    assert_eq!(w[0], 25.0);
    assert_eq!(w.len(), 13);
    for &u in &w {
        assert!(p.params.hvac_power(HOT, u, 25.0) <= 10_000.0 + 1e-6);
    }
    // an off-lattice boundary is inserted once, in order
    let w = p.admissible_controls(12, 25.1, 10_000.0);
    let u_star = p.params.setpoint_for_power(HOT, 25.1, 10_000.0);
    assert_eq!(w[0], u_star);
    assert!(w.windows(2).all(|s| s[0] < s[1]));
}

#[test]
fn cap_below_every_candidate_empties_set() {
    let p = problem(1, HOT, 5, 0.25);
    assert!(p.admissible_controls(12, 22.0, 0.0).is_empty());
}

#[test]
fn terminal_layer_is_the_demand_charge() {
    let p = problem(3, HOT, 5, 0.5);
    let grid = p.state_grid(&WallState::uniform(3, 25.0));
    let layer = p.terminal_layer(&grid, 9000.0);
    assert_eq!(layer.step, 72);
    let expected = 13.5 / 30.0 * 9.0 * 3.0;
    assert!(layer.values.iter().all(|&v| (v - expected).abs() < 1e-12));
}

#[test]
fn backup_of_constant_layer_picks_warmest_setpoint() {
    let p = problem(1, HOT, 5, 0.5);
    let grid = p.state_grid(&WallState::uniform(3, 25.0));
    let next = ValueGrid {
        step: 1,
        values: vec![7.0; grid.len()],
    };
    let b = p.bellman_backup(&grid, &next, f64::INFINITY);
    assert_eq!(b.layer.step, 0);
    let mut wall = vec![0.0; 3];
    for node in 0..grid.len() {
        grid.wall_at(node, &mut wall);
        assert_eq!(b.controls[node], 28.0);
        let stage = p
            .tariff
            .stage_cost(0, p.params.hvac_power(HOT, 28.0, wall[0]));
        assert_relative_eq!(b.layer.values[node], 7.0 + stage, max_relative = 1e-14);
    }
}

#[test]
fn zero_cap_on_hot_day_is_infeasible() {
    let p = problem(1, HOT, 7, 0.5);
    let sol = p
        .solve_fixed_gamma(0.0, &WallState::uniform(3, 28.0))
        .unwrap();
    assert!(!sol.feasible);
    assert!(sol.value.is_infinite());
}

#[test]
fn bisection_bracket_halves_exactly() {
    let p = problem(1, HOT, 7, 0.5);
    let cfg = GammaSearchConfig {
        gamma_lo: 0.0,
        gamma_hi: 16384.0,
        b_max: 10,
        mode: GammaMode::Bisection,
        scan_points: 4,
    };
    let out = p
        .gamma_bisection(&cfg, &WallState::uniform(3, 28.0))
        .unwrap();
    assert!(!out.lower_bound_feasible);
    assert_eq!(out.iterations, 10);
    assert_eq!(out.bracket.1 - out.bracket.0, 16.0);
    assert_eq!(out.gamma_min, out.bracket.1);
    assert!(out.solution.feasible);
    assert_eq!(out.solves, 12);
}

#[test]
fn feasible_lower_bound_returns_immediately() {
    // mild exterior: zero on-peak power is reachable
    let p = problem(1, 20.0, 7, 0.5);
    let cfg = GammaSearchConfig {
        mode: GammaMode::Bisection,
        ..GammaSearchConfig::default()
    };
    let out = p
        .gamma_bisection(&cfg, &WallState::uniform(3, 25.0))
        .unwrap();
    assert!(out.lower_bound_feasible);
    assert_eq!(out.gamma_min, 0.0);
    assert_eq!(out.iterations, 0);
}

#[test]
fn infeasible_upper_bound_is_an_error() {
    let p = problem(1, HOT, 7, 0.5);
    let cfg = GammaSearchConfig {
        gamma_lo: 0.0,
        gamma_hi: 100.0,
        ..GammaSearchConfig::default()
    };
    assert!(matches!(
        p.gamma_bisection(&cfg, &WallState::uniform(3, 28.0)),
        Err(Error::Infeasible { .. })
    ));
}

#[test]
fn energy_part_is_nonincreasing_in_cap() {
    let p = problem(1, HOT, 9, 0.5);
    let init = WallState::uniform(3, 28.0);
    let mut prev = f64::INFINITY;
    for gamma in [9000.0, 10_000.0, 11_000.0, 13_000.0, 20_000.0] {
        let sol = p.solve_fixed_gamma(gamma, &init).unwrap();
        let energy = sol.value - p.tariff.demand_charge(gamma / 1000.0);
        assert!(energy <= prev + 1e-9, "gamma {gamma}: {energy} > {prev}");
        prev = energy;
    }
}

#[test]
fn value_scales_with_prices() {
    let p = problem(1, HOT, 7, 0.5);
    let init = WallState::uniform(3, 28.0);
    let base = p.solve_fixed_gamma(11_000.0, &init).unwrap();
    let scaled = p
        .with_prices(p.tariff.prices.scaled(3.0))
        .solve_fixed_gamma(11_000.0, &init)
        .unwrap();
    assert_relative_eq!(scaled.value, 3.0 * base.value, max_relative = 1e-12);
}

#[test]
fn rollout_respects_band_and_cap() {
    let p = problem(1, HOT, 9, 0.5);
    let init = WallState::uniform(3, 28.0);
    let sol = p.solve_fixed_gamma(11_000.0, &init).unwrap();
    assert!(sol.feasible);
    let r = p.rollout(&sol.policy, &init).unwrap();
    assert_eq!(r.controls.len(), 24);
    assert_eq!(r.states.len(), 25);
    for (k, (&u, &g)) in r.controls.iter().zip(&r.powers).enumerate() {
        assert!(p.band.contains(u));
        if p.tariff.is_on_peak(k) {
            assert!(within_cap(g, 11_000.0), "step {k}: {g}");
        }
    }
    assert!(r.bill.peak_kw <= 11.0 + 1e-9);
}

#[test]
fn total_cost_search_is_no_worse_than_minimal_cap() {
    let p = problem(1, HOT, 7, 0.5);
    let init = WallState::uniform(3, 28.0);
    let cfg = GammaSearchConfig {
        b_max: 10,
        scan_points: 6,
        ..GammaSearchConfig::default()
    };
    let total = p.gamma_total_search(&cfg, &init).unwrap();
    let bis = p.gamma_bisection(&cfg, &init).unwrap();
    assert!(total.value <= bis.solution.value + 1e-12);
    assert!(total.gamma >= total.gamma_min);
    assert!(total.evaluations.len() >= cfg.scan_points);
}

#[test]
fn mismatched_inputs_are_rejected() {
    let p = problem(1, HOT, 5, 0.5);
    assert!(p
        .solve_fixed_gamma(1e4, &WallState::uniform(2, 25.0))
        .is_err());
    let short = UserProblem::new(
        p.params.clone(),
        p.tariff.clone(),
        ExteriorTrace::constant(10, HOT),
        p.band,
        p.grid,
        p.controls.clone(),
    );
    assert!(matches!(short, Err(Error::LengthMismatch { .. })));
    let coarse_dt = UserProblem::new(
        BuildingParams::reference(1800.0).unwrap(),
        p.tariff.clone(),
        p.trace.clone(),
        p.band,
        p.grid,
        p.controls.clone(),
    );
    assert!(coarse_dt.is_err());
}
