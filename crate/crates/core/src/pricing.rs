//! Utility-side price search.
//!
//! Candidate prices live on the unit simplex `p_on + p_off + p_d = 1`; only
//! their ratios matter to the user, whose optimal response is recomputed by
//! the DP for every candidate. The utility's production cost of that
//! response is minimized by a compass search over `(p_d, p_on)`, and the
//! winner is rescaled so that the user's bill equals production cost.

use log::debug;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dp::{GammaMode, GammaSearchConfig, UserProblem, UserSolution};
use crate::error::{Error, Result};
use crate::parallel;
use crate::tariff::{production_cost, total_bill, MarginalCosts, Prices};
use crate::thermal::WallState;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub on: f64,
    pub off: f64,
    pub demand: f64,
    /// Components sum to one (before revenue scaling).
    pub normalized: bool,
}

impl PricePoint {
    /// Point on the simplex with `p_off = 1 - p_d - p_on`.
    pub fn on_simplex(demand: f64, on: f64) -> Result<Self> {
        let p = Self::simplex_unchecked(demand, on);
        if !p.is_valid() || demand + on >= 1.0 {
            return Err(Error::InfeasibleInitialPrices(demand + on));
        }
        Ok(p)
    }

    fn simplex_unchecked(demand: f64, on: f64) -> Self {
        Self {
            on,
            off: 1.0 - demand - on,
            demand,
            normalized: true,
        }
    }

    /// The simplex point with the same ratios as `prices`.
    pub fn proportional_to(prices: Prices) -> Result<Self> {
        let sum = prices.on + prices.off + prices.demand;
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "cannot normalize prices summing to {sum}"
            )));
        }
        let demand = prices.demand / sum;
        let on = prices.on / sum;
        Self::on_simplex(demand, on)
    }

    pub fn prices(&self) -> Prices {
        Prices::new(self.on, self.off, self.demand)
    }

    pub fn is_valid(&self) -> bool {
        [self.on, self.off, self.demand]
            .iter()
            .all(|v| v.is_finite() && *v >= 0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PriceSearchConfig {
    pub step_demand: f64,
    pub step_on: f64,
    /// Stop once the best neighbour improves by no more than this, $.
    pub epsilon: f64,
    /// Only the four diagonal moves `(±Δp_d, ±Δp_on)`.
    pub diagonal_only: bool,
    /// Halve both steps instead of stopping when no neighbour improves.
    pub shrink_on_fail: bool,
    /// Smallest step kept when shrinking.
    pub min_step: f64,
    pub max_iterations: usize,
}

impl Default for PriceSearchConfig {
    fn default() -> Self {
        Self {
            step_demand: 0.01,
            step_on: 0.01,
            epsilon: 1e-4,
            diagonal_only: false,
            shrink_on_fail: false,
            min_step: 1e-5,
            max_iterations: 200,
        }
    }
}

impl PriceSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_demand > 0.0 && self.step_on > 0.0) {
            return Err(Error::InvalidConfig("price steps must be positive".into()));
        }
        if self.epsilon.is_nan() || self.epsilon < 0.0 {
            return Err(Error::InvalidConfig("epsilon must be >= 0".into()));
        }
        Ok(())
    }

    fn moves(&self, step_demand: f64, step_on: f64) -> Vec<(f64, f64)> {
        let mut moves = Vec::with_capacity(8);
        for sd in [-step_demand, step_demand] {
            for so in [-step_on, step_on] {
                moves.push((sd, so));
            }
        }
        if !self.diagonal_only {
            moves.extend([
                (-step_demand, 0.0),
                (step_demand, 0.0),
                (0.0, -step_on),
                (0.0, step_on),
            ]);
        }
        moves
    }
}

/// User response to a price point and what it costs the utility.
#[derive(Debug, Clone)]
pub struct PriceEvaluation {
    pub prices: PricePoint,
    pub production_cost: f64,
    pub response: UserSolution,
}

pub fn evaluate_prices(
    problem: &UserProblem,
    gamma: &GammaSearchConfig,
    costs: &MarginalCosts,
    prices: &PricePoint,
    initial: &WallState,
) -> Result<PriceEvaluation> {
    if !prices.is_valid() {
        return Err(Error::InvalidTariff(format!(
            "invalid price point {prices:?}"
        )));
    }
    let priced = problem.with_prices(prices.prices());
    let response = priced.solve(gamma, initial)?;
    let cost = production_cost(costs, &priced.tariff, &response.rollout.powers)?;
    Ok(PriceEvaluation {
        prices: *prices,
        production_cost: cost,
        response,
    })
}

/// Scales all three prices by `production_cost / bill`.
pub fn revenue_scale(prices: &PricePoint, production_cost: f64, bill: f64) -> Result<PricePoint> {
    if !(bill.is_finite() && bill > 0.0) {
        return Err(Error::DegenerateBill(bill));
    }
    let factor = production_cost / bill;
    Ok(PricePoint {
        on: prices.on * factor,
        off: prices.off * factor,
        demand: prices.demand * factor,
        normalized: false,
    })
}

#[derive(Debug, Clone)]
pub struct PricingResult {
    /// Revenue-neutral prices.
    pub optimal_prices: PricePoint,
    /// The same point on the simplex, before scaling.
    pub simplex_prices: PricePoint,
    pub production_cost: f64,
    pub demand_peak_kw: f64,
    /// Bill of the optimal response under `optimal_prices`.
    pub user_bill: f64,
    /// Accepted moves.
    pub iterations: usize,
    /// Production cost of the start point and then of every accepted move.
    pub history: Vec<f64>,
    pub initial_cost: f64,
    /// The start point rescaled to revenue neutrality.
    pub initial_scaled_prices: PricePoint,
    pub initial_response: UserSolution,
    pub gamma_mode: GammaMode,
    pub response: UserSolution,
    pub evaluations: usize,
}

impl PricingResult {
    pub fn revenue_gap(&self) -> f64 {
        (self.production_cost - self.user_bill).abs() / self.production_cost.abs()
    }
}

pub fn pattern_search(
    problem: &UserProblem,
    gamma: &GammaSearchConfig,
    costs: &MarginalCosts,
    init: PricePoint,
    config: &PriceSearchConfig,
    initial: &WallState,
) -> Result<PricingResult> {
    config.validate()?;
    if !init.normalized || !init.is_valid() || init.demand + init.on >= 1.0 {
        return Err(Error::InfeasibleInitialPrices(init.demand + init.on));
    }
    let start = evaluate_prices(problem, gamma, costs, &init, initial)?;
    let mut evaluations = 1;
    let mut history = vec![start.production_cost];
    let mut current = start.clone();
    let (mut step_demand, mut step_on) = (config.step_demand, config.step_on);
    let mut iterations = 0;

    while iterations < config.max_iterations {
        let neighbours: Vec<PricePoint> = config
            .moves(step_demand, step_on)
            .into_iter()
            .map(|(sd, so)| {
                PricePoint::simplex_unchecked(current.prices.demand + sd, current.prices.on + so)
            })
            .filter(PricePoint::is_valid)
            .collect();
        if neighbours.is_empty() {
            break;
        }
        let evaluated: Vec<Result<PriceEvaluation>> = parallel::install(|| {
            neighbours
                .par_iter()
                .map(|p| evaluate_prices(problem, gamma, costs, p, initial))
                .collect()
        });
        evaluations += evaluated.len();
        let mut best: Option<PriceEvaluation> = None;
        for e in evaluated {
            let e = e?;
            if best
                .as_ref()
                .is_none_or(|b| e.production_cost < b.production_cost)
            {
                best = Some(e);
            }
        }
        let best = best.expect("at least one neighbour");
        let gain = current.production_cost - best.production_cost;
        if gain > config.epsilon {
            debug!(
                "price move {iterations}: p_d = {:.5}, p_on = {:.5}, cost {:.4} -> {:.4}",
                best.prices.demand, best.prices.on, current.production_cost, best.production_cost
            );
            current = best;
            history.push(current.production_cost);
            iterations += 1;
        } else if config.shrink_on_fail && step_demand.max(step_on) > config.min_step {
            step_demand = (step_demand / 2.0).max(config.min_step);
            step_on = (step_on / 2.0).max(config.min_step);
        } else {
            break;
        }
    }

    let optimal = revenue_scale(
        &current.prices,
        current.production_cost,
        current.response.rollout.bill.total,
    )?;
    let user_bill = total_bill(
        &problem.tariff.with_prices(optimal.prices()),
        &current.response.rollout.powers,
    )?
    .total;
    let initial_scaled = revenue_scale(
        &start.prices,
        start.production_cost,
        start.response.rollout.bill.total,
    )?;
    Ok(PricingResult {
        optimal_prices: optimal,
        simplex_prices: current.prices,
        production_cost: current.production_cost,
        demand_peak_kw: current.response.rollout.bill.peak_kw,
        user_bill,
        iterations,
        history,
        initial_cost: start.production_cost,
        initial_scaled_prices: initial_scaled,
        initial_response: start.response,
        gamma_mode: gamma.mode,
        response: current.response,
        evaluations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn simplex_point_fills_off_peak() {
        let p = PricePoint::on_simplex(0.6, 0.3).unwrap();
        assert_relative_eq!(p.off, 0.1, epsilon = 1e-15);
        assert!(PricePoint::on_simplex(0.7, 0.4).is_err());
        assert!(PricePoint::on_simplex(-0.1, 0.4).is_err());
    }

    #[test]
    fn proportional_point_keeps_ratios() {
        let p = PricePoint::proportional_to(Prices::new(0.0814, 0.0572, 59.76)).unwrap();
        assert_relative_eq!(p.on + p.off + p.demand, 1.0, epsilon = 1e-15);
        assert_relative_eq!(p.demand / p.on, 59.76 / 0.0814, max_relative = 1e-12);
    }

    #[test]
    fn revenue_scaling_examples() {
        let p = PricePoint::on_simplex(0.5, 0.3).unwrap();
        let same = revenue_scale(&p, 12.0, 12.0).unwrap();
        assert_eq!(same.prices(), p.prices());
        assert!(!same.normalized);
        let doubled = revenue_scale(&p, 24.0, 12.0).unwrap();
        assert_eq!(doubled.prices(), p.prices().scaled(2.0));
        assert!(matches!(
            revenue_scale(&p, 1.0, 0.0),
            Err(Error::DegenerateBill(_))
        ));
    }

    #[test]
    fn neighbourhood_sizes() {
        let cfg = PriceSearchConfig::default();
        assert_eq!(cfg.moves(0.1, 0.1).len(), 8);
        let diag = PriceSearchConfig {
            diagonal_only: true,
            ..cfg
        };
        assert_eq!(diag.moves(0.1, 0.1).len(), 4);
        assert!(diag
            .moves(0.1, 0.2)
            .iter()
            .all(|(a, b)| *a != 0.0 && *b != 0.0));
    }
}
