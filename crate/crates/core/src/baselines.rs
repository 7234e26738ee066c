//! Reference thermostat schedules.

use crate::dp::ComfortBand;
use crate::error::{Error, Result};
use crate::tariff::TariffSchedule;

pub const DEFAULT_PRECOOL_HOURS: f64 = 3.0;

/// Hold the set-point at the top of the band all day.
pub fn constant_strategy(band: &ComfortBand, horizon: usize) -> Vec<f64> {
    vec![band.t_max; horizon]
}

/// Drop to `t_min` for `precool_hours` before each on-peak window, otherwise
/// sit at `t_max`. A window reaching back past midnight is cut at midnight.
pub fn precool_strategy(
    band: &ComfortBand,
    tariff: &TariffSchedule,
    precool_hours: f64,
) -> Result<Vec<f64>> {
    if !(precool_hours.is_finite() && precool_hours >= 0.0) {
        return Err(Error::InvalidConfig(format!(
            "precool_hours = {precool_hours} must be >= 0"
        )));
    }
    let steps = (precool_hours / tariff.dt_hours).round() as usize;
    let start = tariff.n_on.saturating_sub(steps);
    Ok((0..tariff.horizon)
        .map(|k| {
            let d = k % tariff.steps_per_day;
            if d >= start && d < tariff.n_on {
                band.t_min
            } else {
                band.t_max
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tariff::Prices;

    fn tariff(days: usize) -> TariffSchedule {
        TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 12.0, 19.0, 1.0, 24 * days).unwrap()
    }

    #[test]
    fn constant_sits_at_the_ceiling() {
        let band = ComfortBand::new(22.0, 28.0).unwrap();
        assert_eq!(constant_strategy(&band, 72), vec![28.0; 72]);
        let pinned = ComfortBand::new(25.0, 25.0).unwrap();
        assert_eq!(constant_strategy(&pinned, 5), vec![25.0; 5]);
    }

    #[test]
    fn precool_three_hours_before_noon() {
        let band = ComfortBand::new(22.0, 28.0).unwrap();
        let u = precool_strategy(&band, &tariff(2), 3.0).unwrap();
        for (k, &v) in u.iter().enumerate() {
            let expected = if matches!(k % 24, 9..=11) { 22.0 } else { 28.0 };
            assert_eq!(v, expected, "step {k}");
        }
    }

    #[test]
    fn zero_precool_is_constant() {
        let band = ComfortBand::new(22.0, 28.0).unwrap();
        assert_eq!(
            precool_strategy(&band, &tariff(3), 0.0).unwrap(),
            constant_strategy(&band, 72)
        );
    }

    #[test]
    fn long_precool_is_truncated_at_midnight() {
        let band = ComfortBand::new(22.0, 28.0).unwrap();
        let u = precool_strategy(&band, &tariff(1), 20.0).unwrap();
        assert!(u[..12].iter().all(|&v| v == 22.0));
        assert!(u[12..].iter().all(|&v| v == 28.0));
        assert!(precool_strategy(&band, &tariff(1), -1.0).is_err());
    }
}
