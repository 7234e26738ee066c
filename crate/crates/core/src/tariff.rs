//! Time-of-use tariffs with a demand charge, and the money functionals built
//! on a power profile: energy cost, demand cost, total bill and the utility's
//! production cost.
//!
//! Powers are in watts everywhere in the crate. This module is the only place
//! that converts to kWh / kW.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::thermal::{BuildingParams, ExteriorTrace};

/// Demand charges are quoted per month; a day carries 1/30 of it.
pub const DAYS_PER_BILLING_MONTH: f64 = 30.0;

const W_PER_KW: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prices {
    /// On-peak energy price, $/kWh.
    pub on: f64,
    /// Off-peak energy price, $/kWh.
    pub off: f64,
    /// Demand price, $/kW per month.
    pub demand: f64,
}

impl Prices {
    pub const fn new(on: f64, off: f64, demand: f64) -> Self {
        Self { on, off, demand }
    }

    pub fn scaled(self, factor: f64) -> Self {
        Self {
            on: self.on * factor,
            off: self.off * factor,
            demand: self.demand * factor,
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [("p_on", self.on), ("p_off", self.off), ("p_d", self.demand)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidTariff(format!("{name} = {v} must be >= 0")));
            }
        }
        Ok(())
    }
}

/// How the demand charge accrues over a multi-day horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DemandAccrual {
    /// `(p_d / 30) * peak` for every day touched by the horizon.
    #[default]
    PerDay,
    /// A single `(p_d / 30) * peak` term for the whole horizon.
    Single,
}

/// Prices, the daily on-peak window and the time grid of the horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TariffSchedule {
    pub prices: Prices,
    /// First on-peak step of each day.
    pub n_on: usize,
    /// First off-peak step after the on-peak window.
    pub n_off: usize,
    pub steps_per_day: usize,
    /// Number of steps in the horizon.
    pub horizon: usize,
    pub dt_hours: f64,
    #[serde(default)]
    pub demand_accrual: DemandAccrual,
}

fn whole_steps(hours: f64, dt_hours: f64, what: &str) -> Result<usize> {
    let steps = hours / dt_hours;
    let rounded = steps.round();
    if (steps - rounded).abs() > 1e-9 * steps.abs().max(1.0) || rounded < 0.0 {
        return Err(Error::InvalidTariff(format!(
            "{what} = {hours} h is not a whole number of {dt_hours} h steps"
        )));
    }
    Ok(rounded as usize)
}

impl TariffSchedule {
    /// `t_on_hours..t_off_hours` is the daily on-peak window (half open).
    pub fn new(
        prices: Prices,
        t_on_hours: f64,
        t_off_hours: f64,
        dt_hours: f64,
        horizon: usize,
    ) -> Result<Self> {
        if !(dt_hours.is_finite() && dt_hours > 0.0) {
            return Err(Error::InvalidTariff(format!(
                "dt = {dt_hours} h must be positive"
            )));
        }
        let tariff = Self {
            prices,
            n_on: whole_steps(t_on_hours, dt_hours, "on-peak start")?,
            n_off: whole_steps(t_off_hours, dt_hours, "on-peak end")?,
            steps_per_day: whole_steps(24.0, dt_hours, "day length")?,
            horizon,
            dt_hours,
            demand_accrual: DemandAccrual::PerDay,
        };
        tariff.validate()?;
        Ok(tariff)
    }

    pub fn with_accrual(mut self, accrual: DemandAccrual) -> Self {
        self.demand_accrual = accrual;
        self
    }

    pub fn with_prices(&self, prices: Prices) -> Self {
        Self {
            prices,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.prices.validate()?;
        if self.steps_per_day == 0 {
            return Err(Error::InvalidTariff("day has no steps".into()));
        }
        if !(self.n_on < self.n_off && self.n_off <= self.steps_per_day) {
            return Err(Error::InvalidTariff(format!(
                "on-peak window steps {}..{} must satisfy 0 <= start < end <= {}",
                self.n_on, self.n_off, self.steps_per_day
            )));
        }
        if self.horizon == 0 {
            return Err(Error::InvalidTariff("horizon has no steps".into()));
        }
        Ok(())
    }

    /// Number of (possibly partial) days covered by the horizon.
    pub fn days(&self) -> usize {
        self.horizon.div_ceil(self.steps_per_day)
    }

    pub fn is_on_peak(&self, k: usize) -> bool {
        let d = k % self.steps_per_day;
        d >= self.n_on && d < self.n_off
    }

    pub fn on_peak_steps(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.horizon).filter(|&k| self.is_on_peak(k))
    }

    /// Energy price in effect at step `k`, $/kWh.
    pub fn price_at(&self, k: usize) -> f64 {
        if self.is_on_peak(k) {
            self.prices.on
        } else {
            self.prices.off
        }
    }

    /// Cost of `power_w` held for one step at step `k`, $.
    #[inline]
    pub fn stage_cost(&self, k: usize, power_w: f64) -> f64 {
        self.price_at(k) * power_w * self.dt_hours / W_PER_KW
    }

    /// Demand charge for an on-peak peak of `peak_kw`, honouring the accrual
    /// convention.
    pub fn demand_charge(&self, peak_kw: f64) -> f64 {
        if self.prices.demand == 0.0 {
            // keeps an unbounded cap from turning into NaN
            return 0.0;
        }
        let per_day = self.prices.demand / DAYS_PER_BILLING_MONTH * peak_kw;
        match self.demand_accrual {
            DemandAccrual::PerDay => per_day * self.days() as f64,
            DemandAccrual::Single => per_day,
        }
    }

    fn check_len(&self, powers: &[f64]) -> Result<()> {
        if powers.len() != self.horizon {
            return Err(Error::LengthMismatch {
                what: "power profile",
                expected: self.horizon,
                actual: powers.len(),
            });
        }
        Ok(())
    }

    /// Largest on-peak power, kW.
    pub fn on_peak_max_kw(&self, powers: &[f64]) -> Result<f64> {
        self.check_len(powers)?;
        self.on_peak_steps()
            .map(|k| powers[k] / W_PER_KW)
            .reduce(f64::max)
            .ok_or(Error::NoOnPeakSteps)
    }
}

/// Marginal costs of the utility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MarginalCosts {
    /// Cost of the next kWh produced, $/kWh.
    pub energy: f64,
    /// Cost of the next kW of capacity, $/kW.
    pub capacity: f64,
}

impl MarginalCosts {
    pub fn new(energy: f64, capacity: f64) -> Result<Self> {
        if !(energy.is_finite() && energy >= 0.0 && capacity.is_finite() && capacity >= 0.0) {
            return Err(Error::InvalidConfig(format!(
                "marginal costs a = {energy}, b = {capacity} must be >= 0"
            )));
        }
        Ok(Self { energy, capacity })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BillBreakdown {
    pub energy_cost: f64,
    pub demand_cost: f64,
    pub total: f64,
    pub peak_kw: f64,
}

pub fn energy_cost(tariff: &TariffSchedule, powers: &[f64]) -> Result<f64> {
    tariff.check_len(powers)?;
    Ok(powers
        .iter()
        .enumerate()
        .map(|(k, &g)| tariff.stage_cost(k, g))
        .sum())
}

/// Demand cost and the on-peak peak (kW) it was charged on.
pub fn demand_cost(tariff: &TariffSchedule, powers: &[f64]) -> Result<(f64, f64)> {
    let peak = tariff.on_peak_max_kw(powers)?;
    Ok((tariff.demand_charge(peak), peak))
}

pub fn total_bill(tariff: &TariffSchedule, powers: &[f64]) -> Result<BillBreakdown> {
    let energy = energy_cost(tariff, powers)?;
    let (demand, peak_kw) = demand_cost(tariff, powers)?;
    Ok(BillBreakdown {
        energy_cost: energy,
        demand_cost: demand,
        total: energy + demand,
        peak_kw,
    })
}

/// Energy plus capacity cost of serving `powers`: `a * kWh + b * peak kW`.
pub fn production_cost(
    costs: &MarginalCosts,
    tariff: &TariffSchedule,
    powers: &[f64],
) -> Result<f64> {
    let peak = tariff.on_peak_max_kw(powers)?;
    let kwh: f64 = powers.iter().sum::<f64>() * tariff.dt_hours / W_PER_KW;
    Ok(costs.energy * kwh + costs.capacity * peak)
}

/// Remaining cost from step `j` of a fixed control tail, in sequence form.
///
/// `controls` holds `u[j..N]` and `surface` holds the surface node
/// temperatures `T1[j..=N]` along the corresponding trajectory. The result
/// splits the remaining steps into their off-peak and on-peak parts and adds
/// the demand charge for the cap `gamma_w`; at `j = N` only that terminal
/// charge remains.
pub fn oracle_cost_to_go(
    tariff: &TariffSchedule,
    params: &BuildingParams,
    trace: &ExteriorTrace,
    j: usize,
    controls: &[f64],
    surface: &[f64],
    gamma_w: f64,
) -> Result<f64> {
    let n = tariff.horizon;
    if j > n {
        return Err(Error::IndexOutOfRange { index: j, len: n });
    }
    if controls.len() != n - j {
        return Err(Error::LengthMismatch {
            what: "control tail",
            expected: n - j,
            actual: controls.len(),
        });
    }
    if surface.len() != n - j + 1 {
        return Err(Error::LengthMismatch {
            what: "surface temperature tail",
            expected: n - j + 1,
            actual: surface.len(),
        });
    }
    let terminal = tariff.demand_charge(gamma_w / W_PER_KW);
    if j == n {
        return Ok(terminal);
    }
    let mut off_peak = 0.0;
    let mut on_peak = 0.0;
    for (i, k) in (j..n).enumerate() {
        let g = params.hvac_power(trace.at(k)?, controls[i], surface[i]);
        if tariff.is_on_peak(k) {
            on_peak += g;
        } else {
            off_peak += g;
        }
    }
    let kwh_per_w = tariff.dt_hours / W_PER_KW;
    Ok((tariff.prices.off * off_peak + tariff.prices.on * on_peak) * kwh_per_w + terminal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thermal::{simulate, WallState};
    use approx::assert_relative_eq;

    fn hourly(prices: Prices, days: usize) -> TariffSchedule {
        TariffSchedule::new(prices, 12.0, 19.0, 1.0, 24 * days).unwrap()
    }

    #[test]
    fn on_peak_window_is_noon_to_seven() {
        let t = hourly(Prices::new(0.1, 0.05, 10.0), 2);
        let on: Vec<usize> = t.on_peak_steps().collect();
        assert_eq!(
            on,
            vec![12, 13, 14, 15, 16, 17, 18, 36, 37, 38, 39, 40, 41, 42]
        );
        assert_eq!(t.days(), 2);
        assert_eq!(t.price_at(18), 0.1);
        assert_eq!(t.price_at(19), 0.05);
    }

    #[test]
    fn energy_cost_examples() {
        let t = hourly(Prices::new(0.1, 0.1, 0.0), 1);
        assert_eq!(energy_cost(&t, &[0.0; 24]).unwrap(), 0.0);
        assert_relative_eq!(
            energy_cost(&t, &[1000.0; 24]).unwrap(),
            2.4,
            epsilon = 1e-12
        );

        let t = hourly(Prices::new(0.089, 0.044, 13.5), 1);
        let mut p = [0.0; 24];
        p[14] = 2000.0;
        assert_relative_eq!(energy_cost(&t, &p).unwrap(), 0.178, epsilon = 1e-12);
    }

    #[test]
    fn demand_cost_examples() {
        let t = hourly(Prices::new(0.089, 0.044, 13.5), 1);
        assert_eq!(demand_cost(&t, &[0.0; 24]).unwrap(), (0.0, 0.0));

        let mut p = [5000.0; 24];
        p[15] = 9000.0;
        p[3] = 20_000.0; // off-peak, ignored
        let (cost, peak) = demand_cost(&t, &p).unwrap();
        assert_relative_eq!(peak, 9.0);
        assert_relative_eq!(cost, 4.05, epsilon = 1e-12);
    }

    #[test]
    fn multi_day_demand_conventions() {
        let t = hourly(Prices::new(0.089, 0.044, 13.5), 3);
        let mut p = vec![1000.0; 72];
        p[40] = 10_000.0;
        let (per_day, _) = demand_cost(&t, &p).unwrap();
        assert_relative_eq!(per_day, 13.5, epsilon = 1e-12);
        let single = t.clone().with_accrual(DemandAccrual::Single);
        let (once, _) = demand_cost(&single, &p).unwrap();
        assert_relative_eq!(once, 4.5, epsilon = 1e-12);
    }

    #[test]
    fn total_bill_adds_parts() {
        let t = hourly(Prices::new(0.1, 0.1, 13.5), 1);
        assert_eq!(
            total_bill(&t, &[0.0; 24]).unwrap(),
            BillBreakdown::default()
        );

        // 2.40 energy + 4.05 demand
        let mut p = [1000.0; 24];
        p[12] = 9000.0;
        p[0] = -7000.0;
        let bill = total_bill(&t, &p).unwrap();
        assert_relative_eq!(bill.energy_cost, 2.40, epsilon = 1e-12);
        assert_relative_eq!(bill.demand_cost, 4.05, epsilon = 1e-12);
        assert_relative_eq!(bill.total, 6.45, epsilon = 1e-12);

        let no_demand = t.with_prices(Prices::new(0.1, 0.1, 0.0));
        let bill = total_bill(&no_demand, &p).unwrap();
        assert_eq!(bill.total, energy_cost(&no_demand, &p).unwrap());
    }

    #[test]
    fn production_cost_examples() {
        let t = hourly(Prices::new(0.0, 0.0, 0.0), 1);
        let srp = MarginalCosts::new(0.0814, 59.76).unwrap();
        assert_eq!(production_cost(&srp, &t, &[0.0; 24]).unwrap(), 0.0);

        // 6 kWh in total, 3 kW on-peak max
        let mut p = [0.0; 24];
        p[2] = 1000.0;
        p[3] = 2000.0;
        p[13] = 3000.0;
        assert_relative_eq!(
            production_cost(&srp, &t, &p).unwrap(),
            179.7684,
            epsilon = 1e-10
        );
        let energy_only = MarginalCosts::new(0.0814, 0.0).unwrap();
        assert_relative_eq!(
            production_cost(&energy_only, &t, &p).unwrap(),
            0.0814 * 6.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn missing_on_peak_window_is_an_error() {
        let t = TariffSchedule::new(Prices::new(0.1, 0.1, 1.0), 12.0, 19.0, 1.0, 10).unwrap();
        assert!(matches!(
            demand_cost(&t, &[0.0; 10]),
            Err(Error::NoOnPeakSteps)
        ));
        assert!(matches!(
            energy_cost(&t, &[0.0; 9]),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn rejects_bad_windows() {
        let p = Prices::new(0.1, 0.1, 1.0);
        assert!(TariffSchedule::new(p, 19.0, 12.0, 1.0, 24).is_err());
        assert!(TariffSchedule::new(p, 12.5, 19.0, 1.0, 24).is_err());
        assert!(TariffSchedule::new(p, 12.0, 25.0, 1.0, 24).is_err());
        assert!(TariffSchedule::new(Prices::new(-0.1, 0.1, 1.0), 12.0, 19.0, 1.0, 24).is_err());
        assert!(TariffSchedule::new(p, 12.0, 19.0, 0.5, 48).is_ok());
    }

    #[test]
    fn cost_to_go_terminal_and_zero_cases() {
        let params = BuildingParams::reference(3600.0).unwrap();
        let tariff =
            TariffSchedule::new(Prices::new(0.089, 0.044, 13.5), 2.0, 4.0, 1.0, 24).unwrap();
        let trace = ExteriorTrace::constant(24, 30.0);
        let q = oracle_cost_to_go(&tariff, &params, &trace, 24, &[], &[27.0], 8000.0).unwrap();
        assert_relative_eq!(q, 13.5 / 30.0 * 8.0, epsilon = 1e-12);

        // zero power along the tail and gamma = 0
        let flat = ExteriorTrace::constant(24, 25.0);
        for j in 0..=24 {
            let q = oracle_cost_to_go(
                &tariff,
                &params,
                &flat,
                j,
                &vec![25.0; 24 - j],
                &vec![25.0; 25 - j],
                0.0,
            )
            .unwrap();
            assert_eq!(q, 0.0);
        }
    }

    #[test]
    fn cost_to_go_from_start_is_energy_plus_demand_term() {
        // six 4-hour steps, on-peak 12:00-20:00 is steps 3 and 4
        let params = BuildingParams::new(1e-7, 0.4, 0.0015, 45.0, 1, 14_400.0).unwrap();
        let tariff =
            TariffSchedule::new(Prices::new(0.11, 0.05, 12.0), 12.0, 20.0, 4.0, 6).unwrap();
        let trace = ExteriorTrace::new(vec![31.0, 29.5, 36.0, 41.0, 39.0, 33.0]).unwrap();
        let controls = [24.0, 22.5, 26.0, 28.0, 27.0, 23.0];
        let traj = simulate(
            &params,
            &WallState::new(vec![26.0]).unwrap(),
            &controls,
            &trace,
        )
        .unwrap();
        let surface: Vec<f64> = traj.states.iter().map(|s| s.surface()).collect();
        let gamma = 9500.0;
        let q0 =
            oracle_cost_to_go(&tariff, &params, &trace, 0, &controls, &surface, gamma).unwrap();
        let je = energy_cost(&tariff, &traj.powers).unwrap();
        assert_relative_eq!(q0, je + 12.0 / 30.0 * 9.5, max_relative = 1e-12);

        // each Q_j differs from Q_{j+1} by exactly the stage at j
        for j in 0..6 {
            let qj = oracle_cost_to_go(
                &tariff,
                &params,
                &trace,
                j,
                &controls[j..],
                &surface[j..],
                gamma,
            )
            .unwrap();
            let qn = oracle_cost_to_go(
                &tariff,
                &params,
                &trace,
                j + 1,
                &controls[j + 1..],
                &surface[j + 1..],
                gamma,
            )
            .unwrap();
            assert_relative_eq!(
                qj - qn,
                tariff.stage_cost(j, traj.powers[j]),
                max_relative = 1e-9
            );
        }
    }
}
