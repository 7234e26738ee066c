//! Scenario configuration, exterior-temperature ingestion, strategy runs and
//! result files.

mod config;
mod io;

use log::info;

use crate::baselines::{constant_strategy, precool_strategy};
use crate::dp::UserProblem;
use crate::error::{Error, Result};
use crate::pricing::{pattern_search, PricePoint, PricingResult};
use crate::tariff::{production_cost, total_bill, BillBreakdown, MarginalCosts, Prices};
use crate::thermal::{simulate_horizon, ExteriorTrace, WallState};

pub use config::{ScenarioConfig, Strategy};
pub use io::{
    emit_results, fmt_sig, load_exterior_csv, render_report, trajectory_file, REPORT_FILE,
    SUMMARY_FILE, SUMMARY_HEADER,
};

/// Exterior temperature used when a config names no trace, °C.
pub const DEFAULT_EXTERIOR_C: f64 = 36.0;

/// Outcome of one strategy on one scenario.
#[derive(Debug, Clone)]
pub struct ScenarioResult {
    pub strategy: String,
    /// Tariff the bill was computed under.
    pub prices: Prices,
    pub dt_hours: f64,
    pub controls: Vec<f64>,
    /// `N + 1` wall states.
    pub states: Vec<WallState>,
    pub powers_w: Vec<f64>,
    pub bill: BillBreakdown,
    pub production_cost: f64,
    pub peak_kw: f64,
    /// Cap chosen by the solver; for fixed schedules the realized on-peak peak.
    pub gamma_w: f64,
    /// Grid value `V_0(T0)` of the DP solve behind this schedule.
    pub dp_value: Option<f64>,
    pub clamps: usize,
    pub iterations: Option<usize>,
    pub notes: Vec<String>,
}

/// A validated config with its trace loaded and the user problem built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    pub problem: UserProblem,
    pub initial: WallState,
    pub costs: MarginalCosts,
}

impl Scenario {
    /// Loads the trace named in `config`, or a constant trace when none is set.
    pub fn load(config: ScenarioConfig) -> Result<Self> {
        config.validate()?;
        let horizon = config.horizon();
        let trace = match &config.exterior_csv {
            Some(path) => load_exterior_csv(path, config.dt_hours, horizon)?,
            None => ExteriorTrace::constant(horizon, DEFAULT_EXTERIOR_C),
        };
        Self::build(config, trace)
    }

    pub fn build(config: ScenarioConfig, trace: ExteriorTrace) -> Result<Self> {
        config.validate()?;
        let problem = UserProblem::new(
            config.building()?,
            config.tariff()?,
            trace,
            config.band()?,
            config.grid(),
            config.controls(),
        )?;
        Ok(Self {
            initial: config.initial_wall()?,
            costs: config.marginal_costs()?,
            config,
            problem,
        })
    }

    fn context(&self, strategy: &str, err: Error) -> Error {
        Error::Scenario {
            scenario: self.config.name.clone(),
            strategy: strategy.to_string(),
            source: Box::new(err),
        }
    }

    /// Result of holding `controls` under `prices`.
    fn evaluate(
        &self,
        strategy: &str,
        prices: Prices,
        controls: Vec<f64>,
        gamma_w: Option<f64>,
    ) -> Result<ScenarioResult> {
        let p = &self.problem;
        let traj = simulate_horizon(&p.params, &self.initial, &controls, &p.trace, p.horizon())?;
        let tariff = p.tariff.with_prices(prices);
        let bill = total_bill(&tariff, &traj.powers)?;
        let production = production_cost(&self.costs, &tariff, &traj.powers)?;
        let peak_kw = tariff.on_peak_max_kw(&traj.powers)?;
        Ok(ScenarioResult {
            strategy: strategy.to_string(),
            prices,
            dt_hours: tariff.dt_hours,
            controls,
            states: traj.states,
            powers_w: traj.powers,
            peak_kw,
            gamma_w: gamma_w.unwrap_or(peak_kw * 1000.0),
            bill,
            production_cost: production,
            dp_value: None,
            clamps: 0,
            iterations: None,
            notes: Vec::new(),
        })
    }

    /// Runs a fixed control sequence.
    pub fn run_fixed(&self, name: &str, controls: Vec<f64>) -> Result<ScenarioResult> {
        self.evaluate(name, self.problem.tariff.prices, controls, None)
            .map_err(|e| self.context(name, e))
    }

    pub fn run_optimal(&self) -> Result<ScenarioResult> {
        let name = Strategy::Optimal.name();
        let run = || -> Result<ScenarioResult> {
            let sol = self
                .problem
                .solve(&self.config.gamma_search(), &self.initial)?;
            let mut r = self.evaluate(
                name,
                self.problem.tariff.prices,
                sol.rollout.controls.clone(),
                Some(sol.gamma),
            )?;
            r.clamps = sol.clamps;
            r.dp_value = Some(sol.value);
            r.iterations = Some(sol.solves);
            r.notes.push(format!(
                "gamma search {}: {} DP solves, grid value {}",
                sol.mode,
                sol.solves,
                fmt_sig(sol.value)
            ));
            Ok(r)
        };
        run().map_err(|e| self.context(name, e))
    }

    pub fn run_constant(&self) -> Result<ScenarioResult> {
        let controls = constant_strategy(&self.problem.band, self.problem.horizon());
        self.run_fixed(Strategy::Constant.name(), controls)
    }

    pub fn run_precool(&self) -> Result<ScenarioResult> {
        let name = Strategy::Precool.name();
        let controls = precool_strategy(
            &self.problem.band,
            &self.problem.tariff,
            self.config.precool_hours,
        )
        .map_err(|e| self.context(name, e))?;
        self.run_fixed(name, controls)
    }

    /// Price search from the configured start point.
    pub fn optimize_prices(&self) -> Result<PricingResult> {
        let name = Strategy::PriceOptimization.name();
        let run = || -> Result<PricingResult> {
            let init: PricePoint = self.config.initial_prices()?;
            pattern_search(
                &self.problem,
                &self.config.gamma_search(),
                &self.costs,
                init,
                &self.config.price_search(),
                &self.initial,
            )
        };
        run().map_err(|e| self.context(name, e))
    }

    /// Rows for the start and end points of a price search, both at
    /// revenue-neutral prices.
    pub fn pricing_results(&self, pricing: &PricingResult) -> Result<Vec<ScenarioResult>> {
        let name = Strategy::PriceOptimization.name();
        let mut initial = self
            .evaluate(
                "price_initial",
                pricing.initial_scaled_prices.prices(),
                pricing.initial_response.rollout.controls.clone(),
                Some(pricing.initial_response.gamma),
            )
            .map_err(|e| self.context(name, e))?;
        initial.clamps = pricing.initial_response.clamps;
        initial.dp_value = Some(pricing.initial_response.value);
        let mut optimal = self
            .evaluate(
                "price_optimal",
                pricing.optimal_prices.prices(),
                pricing.response.rollout.controls.clone(),
                Some(pricing.response.gamma),
            )
            .map_err(|e| self.context(name, e))?;
        optimal.clamps = pricing.response.clamps;
        optimal.dp_value = Some(pricing.response.value);
        optimal.iterations = Some(pricing.iterations);
        let sp = pricing.simplex_prices;
        optimal.notes.push(format!(
            "simplex prices: on {}, off {}, demand {}",
            fmt_sig(sp.on),
            fmt_sig(sp.off),
            fmt_sig(sp.demand)
        ));
        optimal.notes.push(format!(
            "production cost {} -> {} over {} price evaluations; revenue gap {:.3e}",
            fmt_sig(pricing.initial_cost),
            fmt_sig(pricing.production_cost),
            pricing.evaluations,
            pricing.revenue_gap()
        ));
        Ok(vec![initial, optimal])
    }

    pub fn run_strategy(&self, strategy: Strategy) -> Result<Vec<ScenarioResult>> {
        info!(
            "scenario {:?}: running {}",
            self.config.name,
            strategy.name()
        );
        match strategy {
            Strategy::Optimal => Ok(vec![self.run_optimal()?]),
            Strategy::Constant => Ok(vec![self.run_constant()?]),
            Strategy::Precool => Ok(vec![self.run_precool()?]),
            Strategy::PriceOptimization => self.pricing_results(&self.optimize_prices()?),
        }
    }

    /// Runs every strategy listed in the config, in order.
    pub fn run(&self) -> Result<Vec<ScenarioResult>> {
        let mut out = Vec::new();
        for &s in &self.config.strategies {
            out.extend(self.run_strategy(s)?);
        }
        Ok(out)
    }
}

/// Loads and runs `config`.
pub fn run_scenario(config: ScenarioConfig) -> Result<Vec<ScenarioResult>> {
    Scenario::load(config)?.run()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ScenarioConfig {
        ScenarioConfig {
            days: 1,
            grid_nodes: 9,
            du: 0.5,
            b_max: 8,
            scan_points: 4,
            ..ScenarioConfig::default()
        }
    }

    #[test]
    fn baselines_carry_realized_peak_as_gamma() {
        let s = Scenario::load(small()).unwrap();
        let r = s.run_constant().unwrap();
        assert_eq!(r.controls.len(), 24);
        assert_eq!(r.states.len(), 25);
        assert_eq!(r.gamma_w, r.peak_kw * 1000.0);
        assert_eq!(r.bill.peak_kw, r.peak_kw);
    }

    #[test]
    fn errors_name_scenario_and_strategy() {
        let s = Scenario::load(small()).unwrap();
        let err = s.run_fixed("manual", vec![25.0; 3]).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("scenario") && msg.contains("manual"), "{msg}");
    }

    #[test]
    fn optimal_is_within_band_and_not_worse_than_constant() {
        let s = Scenario::load(small()).unwrap();
        let opt = s.run_optimal().unwrap();
        let cst = s.run_constant().unwrap();
        assert!(opt.controls.iter().all(|&u| (22.0..=28.0).contains(&u)));
        assert!(opt.bill.total <= cst.bill.total * (1.0 + 1e-9));
    }
}
