//! Searches over the on-peak power cap.
//!
//! Feasibility is monotone in the cap (a larger cap only enlarges every
//! admissible set), so the smallest feasible cap is found by bisection. The
//! total user cost `h(gamma) = V_0(T0; gamma)` trades energy against the
//! demand charge and is minimized over `[gamma_min, gamma_hi]` by a coarse
//! scan followed by golden-section refinement.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::thermal::WallState;

use super::{FixedGammaSolution, Rollout, UserProblem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaMode {
    /// Smallest feasible cap.
    Bisection,
    /// Cap minimizing energy cost plus demand charge.
    #[default]
    TotalCost,
}

impl std::fmt::Display for GammaMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            GammaMode::Bisection => "bisection",
            GammaMode::TotalCost => "total_cost",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSearchConfig {
    /// Lower end of the cap bracket, W.
    pub gamma_lo: f64,
    /// Upper end of the cap bracket, W. Must be feasible.
    pub gamma_hi: f64,
    /// Bisection iterations; also sets the golden-section stopping width
    /// `(gamma_hi - gamma_lo) / 2^b_max`.
    pub b_max: u32,
    pub mode: GammaMode,
    /// Points in the coarse scan of the total-cost search.
    pub scan_points: usize,
}

impl Default for GammaSearchConfig {
    fn default() -> Self {
        Self {
            gamma_lo: 0.0,
            gamma_hi: 25_000.0,
            b_max: 16,
            mode: GammaMode::TotalCost,
            scan_points: 16,
        }
    }
}

impl GammaSearchConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma_lo.is_finite()
            && self.gamma_hi.is_finite()
            && self.gamma_lo >= 0.0
            && self.gamma_lo < self.gamma_hi)
        {
            return Err(Error::InvalidConfig(format!(
                "gamma bracket [{}, {}] must satisfy 0 <= lo < hi",
                self.gamma_lo, self.gamma_hi
            )));
        }
        if self.b_max == 0 {
            return Err(Error::InvalidConfig("b_max must be at least 1".into()));
        }
        if self.scan_points < 2 {
            return Err(Error::InvalidConfig(
                "scan_points must be at least 2".into(),
            ));
        }
        Ok(())
    }

    /// Final bracket width promised by bisection.
    pub fn resolution(&self) -> f64 {
        (self.gamma_hi - self.gamma_lo) / 2f64.powi(self.b_max as i32)
    }
}

#[derive(Debug, Clone)]
pub struct BisectionOutcome {
    /// Smallest cap found feasible.
    pub gamma_min: f64,
    /// Final `(infeasible, feasible)` bracket.
    pub bracket: (f64, f64),
    pub iterations: u32,
    /// The lower end of the bracket was already feasible; no bisection ran.
    pub lower_bound_feasible: bool,
    pub solution: FixedGammaSolution,
    pub solves: usize,
}

#[derive(Debug, Clone)]
pub struct TotalSearchOutcome {
    pub gamma: f64,
    pub value: f64,
    pub gamma_min: f64,
    pub solution: FixedGammaSolution,
    /// Every `(gamma, h(gamma))` evaluated, in evaluation order.
    pub evaluations: Vec<(f64, f64)>,
    pub solves: usize,
}

/// Optimal user response: chosen cap, its DP value and the realized rollout.
#[derive(Debug, Clone)]
pub struct UserSolution {
    pub mode: GammaMode,
    pub gamma: f64,
    pub value: f64,
    pub rollout: Rollout,
    pub solves: usize,
    pub clamps: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

impl UserProblem {
    pub fn gamma_bisection(
        &self,
        config: &GammaSearchConfig,
        initial: &WallState,
    ) -> Result<BisectionOutcome> {
        config.validate()?;
        let (mut lo, mut hi) = (config.gamma_lo, config.gamma_hi);
        let mut best = self.solve_fixed_gamma(hi, initial)?;
        if !best.feasible {
            return Err(Error::Infeasible { gamma: hi });
        }
        let at_lo = self.solve_fixed_gamma(lo, initial)?;
        if at_lo.feasible {
            return Ok(BisectionOutcome {
                gamma_min: lo,
                bracket: (lo, lo),
                iterations: 0,
                lower_bound_feasible: true,
                solution: at_lo,
                solves: 2,
            });
        }
        for _ in 0..config.b_max {
            let mid = 0.5 * (lo + hi);
            let trial = self.solve_fixed_gamma(mid, initial)?;
            if trial.feasible {
                hi = mid;
                best = trial;
            } else {
                lo = mid;
            }
        }
        Ok(BisectionOutcome {
            gamma_min: hi,
            bracket: (lo, hi),
            iterations: config.b_max,
            lower_bound_feasible: false,
            solution: best,
            solves: 2 + config.b_max as usize,
        })
    }

    pub fn gamma_total_search(
        &self,
        config: &GammaSearchConfig,
        initial: &WallState,
    ) -> Result<TotalSearchOutcome> {
        let bisection = self.gamma_bisection(config, initial)?;
        let gamma_min = bisection.gamma_min;
        let mut solves = bisection.solves;
        let mut evaluations = vec![(gamma_min, bisection.solution.value)];
        let mut best = bisection.solution;

        let hi = config.gamma_hi;
        let tolerance = config.resolution();
        if hi - gamma_min <= tolerance {
            return Ok(TotalSearchOutcome {
                gamma: best.gamma,
                value: best.value,
                gamma_min,
                solution: best,
                evaluations,
                solves,
            });
        }

        let n = config.scan_points;
        let cell = (hi - gamma_min) / (n - 1) as f64;
        let scan: Vec<f64> = (1..n)
            .map(|i| {
                if i == n - 1 {
                    hi
                } else {
                    gamma_min + i as f64 * cell
                }
            })
            .collect();
        let scanned: Vec<Result<FixedGammaSolution>> = parallel::install(|| {
            scan.par_iter()
                .map(|&g| self.solve_fixed_gamma(g, initial))
                .collect()
        });
        let mut best_index = 0;
        for (i, sol) in scanned.into_iter().enumerate() {
            let sol = sol?;
            solves += 1;
            evaluations.push((sol.gamma, sol.value));
            if sol.value < best.value {
                best_index = i + 1;
                best = sol;
            }
        }

        let point = |i: usize| gamma_min + i as f64 * cell;
        let mut a = point(best_index.saturating_sub(1));
        let mut b = if best_index + 1 >= n {
            hi
        } else {
            point(best_index + 1)
        };
        let mut eval = |g: f64, best: &mut FixedGammaSolution| -> Result<f64> {
            let sol = self.solve_fixed_gamma(g, initial)?;
            solves += 1;
            evaluations.push((g, sol.value));
            let v = sol.value;
            if v < best.value || (v == best.value && g < best.gamma) {
                *best = sol;
            }
            Ok(v)
        };
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let mut fc = eval(c, &mut best)?;
        let mut fd = eval(d, &mut best)?;
        while b - a > tolerance {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                fc = eval(c, &mut best)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                fd = eval(d, &mut best)?;
            }
        }

        Ok(TotalSearchOutcome {
            gamma: best.gamma,
            value: best.value,
            gamma_min,
            solution: best,
            evaluations,
            solves,
        })
    }

    /// Solves the user problem with the configured cap search and rolls the
    /// resulting policy forward from `initial`.
    pub fn solve(&self, config: &GammaSearchConfig, initial: &WallState) -> Result<UserSolution> {
        let (solution, solves) = match config.mode {
            GammaMode::Bisection => {
                let out = self.gamma_bisection(config, initial)?;
                (out.solution, out.solves)
            }
            GammaMode::TotalCost => {
                let out = self.gamma_total_search(config, initial)?;
                (out.solution, out.solves)
            }
        };
        let rollout = self.rollout(&solution.policy, initial)?;
        Ok(UserSolution {
            mode: config.mode,
            gamma: solution.gamma,
            value: solution.value,
            clamps: solution.clamps + rollout.clamps,
            rollout,
            solves,
        })
    }
}
