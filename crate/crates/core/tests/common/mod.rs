//! Property checks shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, TestCaseError, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thermostat_core::baselines::{constant_strategy, precool_strategy};
use thermostat_core::dp::{ComfortBand, ControlCandidates, GridSpec, UserProblem};
use thermostat_core::oracle::{aligned_grid, random_grid_aligned};
use thermostat_core::tariff::total_bill;
use thermostat_core::thermal::{self, BuildingParams, ExteriorTrace, WallState};
use thermostat_core::{Prices, TariffSchedule};

pub const CASES: u32 = 128;

pub fn params_strategy() -> impl Strategy<Value = BuildingParams> {
    // keeps alpha dt / dx^2 inside the stable range
    (
        1usize..=5,
        1e-7..1.2e-6f64,
        0.0005..0.005f64,
        5.0..100.0f64,
        0.2..0.6f64,
    )
        .prop_map(|(m, alpha, r_e, c_in, l_in)| {
            let dx = l_in / (m + 1) as f64;
            let dt = 0.45 * dx * dx / alpha;
            BuildingParams::new(alpha, l_in, r_e, c_in, m, dt).unwrap()
        })
}

/// A uniform wall at `t` with the set-point and exterior also at `t` stays
/// put and draws no power.
pub fn check_equilibrium(params: &BuildingParams, t: f64) -> Result<(), TestCaseError> {
    let wall = WallState::uniform(params.m, t);
    let next = thermal::step(params, &wall, t).unwrap();
    for &v in next.temps() {
        prop_assert!((v - t).abs() <= 1e-12 * t.abs().max(1.0), "{v} != {t}");
    }
    prop_assert!(params.hvac_power(t, t, t).abs() <= 1e-9);
    Ok(())
}

/// Power is affine in `(T_e, u, T_1)` with coefficients `1/R_e`,
/// `-(1/R_e + k)` and `k`, `k` the surface conductance.
pub fn check_affine_power(
    params: &BuildingParams,
    x: (f64, f64, f64),
    d: (f64, f64, f64),
    s: f64,
) -> Result<(), TestCaseError> {
    let g = |p: (f64, f64, f64)| params.hvac_power(p.0, p.1, p.2);
    let k = params.surface_conductance();
    let expect = x.0 / params.r_e - (1.0 / params.r_e + k) * x.1 + k * x.2;
    let scale = (x.0.abs() + x.1.abs() + x.2.abs()) * (1.0 / params.r_e + k);
    prop_assert!((g(x) - expect).abs() <= 1e-12 * scale);
    let moved = (x.0 + s * d.0, x.1 + s * d.1, x.2 + s * d.2);
    let unit = (x.0 + d.0, x.1 + d.1, x.2 + d.2);
    let lhs = g(moved) - g(x);
    let rhs = s * (g(unit) - g(x));
    prop_assert!((lhs - rhs).abs() <= 1e-9 * scale.max(1.0), "{lhs} vs {rhs}");
    Ok(())
}

/// The bill of a fixed power profile scales linearly with all three prices.
pub fn check_price_homogeneity(
    prices: Prices,
    powers: &[f64],
    lambda: f64,
) -> Result<(), TestCaseError> {
    let tariff = TariffSchedule::new(prices, 12.0, 19.0, 1.0, powers.len()).unwrap();
    let base = total_bill(&tariff, powers).unwrap();
    let scaled = total_bill(&tariff.with_prices(prices.scaled(lambda)), powers).unwrap();
    let tol = 1e-12 * (lambda * base.total.abs()).max(1e-9);
    prop_assert!((scaled.total - lambda * base.total).abs() <= tol);
    prop_assert!((scaled.energy_cost - lambda * base.energy_cost).abs() <= tol);
    prop_assert!((scaled.demand_cost - lambda * base.demand_cost).abs() <= tol);
    prop_assert_eq!(scaled.peak_kw, base.peak_kw);
    Ok(())
}

fn nesting_problem(t_ext: f64, include_boundary: bool) -> UserProblem {
    let params = BuildingParams::reference(3600.0).unwrap();
    let tariff = TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 12.0, 19.0, 1.0, 24).unwrap();
    let band = ComfortBand::new(22.0, 28.0).unwrap();
    UserProblem::new(
        params,
        tariff,
        ExteriorTrace::constant(24, t_ext),
        band,
        GridSpec::around_band(&band, 2.0, 5),
        ControlCandidates::Uniform {
            du: 0.25,
            include_boundary,
        },
    )
    .unwrap()
}

/// Admissible controls at a smaller cap are admissible at a larger one.
/// Lattice candidates nest as sets; the inserted boundary set-point of the
/// smaller cap satisfies the larger cap.
pub fn check_admissible_nesting(
    t_ext: f64,
    t1: f64,
    gamma_a: f64,
    gamma_b: f64,
) -> Result<(), TestCaseError> {
    let (lo, hi) = if gamma_a <= gamma_b {
        (gamma_a, gamma_b)
    } else {
        (gamma_b, gamma_a)
    };
    let lattice = nesting_problem(t_ext, false);
    let k = 14;
    let small = lattice.admissible_controls(k, t1, lo);
    let large = lattice.admissible_controls(k, t1, hi);
    for u in &small {
        prop_assert!(large.contains(u), "{u} admissible at {lo} but not at {hi}");
    }
    let with_boundary = nesting_problem(t_ext, true);
    for u in with_boundary.admissible_controls(k, t1, lo) {
        prop_assert!(with_boundary.band.contains(u));
        let g = with_boundary.params.hvac_power(t_ext, u, t1);
        prop_assert!(g <= hi + 1e-9 * hi.abs() + 1e-6);
    }
    Ok(())
}

/// Controls emitted by the DP rollout and by both baselines stay in the band.
pub fn check_comfort_containment(seed: u64, t_min: f64, width: f64) -> Result<(), TestCaseError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = random_grid_aligned(&mut rng, 4);
    let problem = inst.to_user_problem(aligned_grid()).unwrap();
    let sol = problem
        .solve_fixed_gamma(inst.gamma, &inst.initial)
        .unwrap();
    if sol.feasible {
        let r = problem.rollout(&sol.policy, &inst.initial).unwrap();
        for &u in &r.controls {
            prop_assert!(inst.band.contains(u), "rollout control {u} outside band");
        }
    }
    let band = ComfortBand::new(t_min, t_min + width).unwrap();
    let tariff = TariffSchedule::new(Prices::new(0.1, 0.05, 10.0), 12.0, 19.0, 1.0, 48).unwrap();
    let pre = precool_strategy(&band, &tariff, (seed % 13) as f64).unwrap();
    for u in constant_strategy(&band, 48).into_iter().chain(pre) {
        prop_assert!(band.contains(u));
    }
    Ok(())
}

fn run<S: Strategy>(
    strategy: S,
    check: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let mut runner = TestRunner::new(Config {
        cases: CASES,
        failure_persistence: None,
        ..Config::default()
    });
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

pub fn temp() -> impl Strategy<Value = f64> {
    15.0..45.0f64
}

/// Runs every property with [`CASES`] cases; one entry per property.
pub fn run_all() -> Vec<(&'static str, Result<(), String>)> {
    vec![
        (
            "equilibrium",
            run((params_strategy(), temp()), |(p, t)| {
                check_equilibrium(&p, t)
            }),
        ),
        (
            "affine power",
            run(
                (
                    params_strategy(),
                    (temp(), temp(), temp()),
                    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
                    -3.0..3.0f64,
                ),
                |(p, x, d, s)| check_affine_power(&p, x, d, s),
            ),
        ),
        (
            "price homogeneity",
            run(
                (
                    (0.0..0.5f64, 0.0..0.5f64, 0.0..60.0f64),
                    prop::collection::vec(-2000.0..20_000.0f64, 24..=72),
                    0.01..100.0f64,
                ),
                |((on, off, d), powers, l)| {
                    check_price_homogeneity(Prices::new(on, off, d), &powers, l)
                },
            ),
        ),
        (
            "admissible nesting",
            run(
                (
                    25.0..45.0f64,
                    20.0..30.0f64,
                    0.0..20_000.0f64,
                    0.0..20_000.0f64,
                ),
                |(te, t1, a, b)| check_admissible_nesting(te, t1, a, b),
            ),
        ),
        (
            "comfort containment",
            run((any::<u64>(), 18.0..26.0f64, 0.0..8.0f64), |(s, lo, w)| {
                check_comfort_containment(s, lo, w)
            }),
        ),
    ]
}
