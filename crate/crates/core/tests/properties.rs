mod common;

use common::*;
use proptest::prelude::*;
use thermostat_core::Prices;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(CASES))]

    #[test]
    fn uniform_wall_at_setpoint_is_a_fixed_point(p in params_strategy(), t in temp()) {
        check_equilibrium(&p, t)?;
    }

    #[test]
    fn power_is_affine(
        p in params_strategy(),
        x in (temp(), temp(), temp()),
        d in (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64),
        s in -3.0..3.0f64,
    ) {
        check_affine_power(&p, x, d, s)?;
    }

    #[test]
    fn bill_is_homogeneous_in_prices(
        (on, off, dp) in (0.0..0.5f64, 0.0..0.5f64, 0.0..60.0f64),
        powers in prop::collection::vec(-2000.0..20_000.0f64, 24..=72),
        lambda in 0.01..100.0f64,
    ) {
        check_price_homogeneity(Prices::new(on, off, dp), &powers, lambda)?;
    }

    #[test]
    fn admissible_sets_nest_in_the_cap(
        te in 25.0..45.0f64,
        t1 in 20.0..30.0f64,
        a in 0.0..20_000.0f64,
        b in 0.0..20_000.0f64,
    ) {
        check_admissible_nesting(te, t1, a, b)?;
    }

    #[test]
    fn emitted_controls_stay_in_band(seed in any::<u64>(), lo in 18.0..26.0f64, w in 0.0..8.0f64) {
        check_comfort_containment(seed, lo, w)?;
    }
}
