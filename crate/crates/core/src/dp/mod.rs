//! Backward dynamic programming for the thermostat problem at a fixed
//! on-peak power cap, plus the searches over the cap.
//!
//! For a cap `gamma` the value function starts at the demand charge for
//! `gamma` and is built backwards one step at a time:
//!
//! ```text
//! V_N(x)     = demand_charge(gamma)
//! V_{k}(x)   = min_{u in W_k(x)}  price_k * g(k, u, x_1) * dt + V_{k+1}(f(x, u))
//! ```
//!
//! `W_k(x)` is the comfort band, further restricted at on-peak steps to
//! set-points whose HVAC power stays at or below `gamma`. `V_k` lives on a
//! Cartesian grid of wall states and is read back by multilinear
//! interpolation.

mod gamma;
mod grid;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::parallel;
use crate::tariff::{total_bill, BillBreakdown, Prices, TariffSchedule};
use crate::thermal::{BuildingParams, ExteriorTrace, WallState};

pub use gamma::{BisectionOutcome, GammaMode, GammaSearchConfig, TotalSearchOutcome, UserSolution};
pub use grid::{GridSpec, StateGrid};

/// Relative slack when checking an on-peak power against the cap.
pub const CAP_REL_TOL: f64 = 1e-9;
/// Absolute slack (W) for the same check.
pub const CAP_ABS_TOL: f64 = 1e-6;

/// Two costs closer than this (relative, floored at $1) count as a tie.
const TIE_REL: f64 = 1e-12;

pub(crate) fn within_cap(power: f64, gamma: f64) -> bool {
    power <= gamma + CAP_REL_TOL * gamma.abs() + CAP_ABS_TOL
}

#[inline]
fn improves(candidate: f64, incumbent: f64) -> bool {
    if incumbent.is_finite() {
        candidate < incumbent - TIE_REL * incumbent.abs().max(1.0)
    } else {
        candidate < incumbent
    }
}

/// Acceptable interior temperatures, °C.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComfortBand {
    pub t_min: f64,
    pub t_max: f64,
}

impl ComfortBand {
    /// A degenerate band (`t_min == t_max`) is allowed and pins the set-point.
    pub fn new(t_min: f64, t_max: f64) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite() && t_min <= t_max) {
            return Err(Error::InvalidBand { t_min, t_max });
        }
        Ok(Self { t_min, t_max })
    }

    pub fn contains(&self, u: f64) -> bool {
        u >= self.t_min && u <= self.t_max
    }
}

/// Set-points tried at each step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ControlCandidates {
    /// `t_min, t_min + du, ...` up to `t_max`. With `include_boundary` the
    /// set-point at which on-peak power exactly meets the cap is added too.
    Uniform { du: f64, include_boundary: bool },
    /// An explicit list per step. Values outside the band are ignored.
    PerStep(Vec<Vec<f64>>),
}

impl ControlCandidates {
    pub const DEFAULT_DU: f64 = 0.25;

    pub fn uniform(du: f64) -> Self {
        Self::Uniform {
            du,
            include_boundary: true,
        }
    }
}

/// Cost-to-go over the grid at step `step`; `+inf` marks infeasible nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueGrid {
    pub step: usize,
    pub values: Vec<f64>,
}

/// Value layers `V_0..=V_N` and grid minimizers `mu_0..mu_{N-1}` for one cap.
#[derive(Debug, Clone)]
pub struct Policy {
    pub gamma: f64,
    pub grid: StateGrid,
    pub layers: Vec<ValueGrid>,
    /// `controls[k][node]`, NaN where no admissible control exists.
    pub controls: Vec<Vec<f64>>,
}

impl Policy {
    pub fn value_at(&self, step: usize, wall: &WallState) -> f64 {
        self.grid
            .interpolate(&self.layers[step].values, wall.temps())
            .0
    }
}

#[derive(Debug, Clone)]
pub struct FixedGammaSolution {
    pub gamma: f64,
    /// `V_0(T0)`; infinite when infeasible.
    pub value: f64,
    pub feasible: bool,
    pub policy: Policy,
    /// Successor states that fell outside the grid box and were clamped.
    pub clamps: usize,
}

/// Result of the backup from layer `k + 1` to layer `k`.
#[derive(Debug, Clone)]
pub struct Backup {
    pub layer: ValueGrid,
    pub controls: Vec<f64>,
    pub clamps: usize,
}

/// Forward pass that re-minimizes the Bellman right-hand side at the
/// realized wall state.
#[derive(Debug, Clone)]
pub struct Rollout {
    pub gamma: f64,
    pub controls: Vec<f64>,
    pub states: Vec<WallState>,
    pub powers: Vec<f64>,
    pub bill: BillBreakdown,
    pub clamps: usize,
}

/// Everything the user-level problem needs apart from the cap.
#[derive(Debug, Clone)]
pub struct UserProblem {
    pub params: BuildingParams,
    pub tariff: TariffSchedule,
    pub trace: ExteriorTrace,
    pub band: ComfortBand,
    pub grid: GridSpec,
    pub controls: ControlCandidates,
}

impl UserProblem {
    pub fn new(
        params: BuildingParams,
        tariff: TariffSchedule,
        trace: ExteriorTrace,
        band: ComfortBand,
        grid: GridSpec,
        controls: ControlCandidates,
    ) -> Result<Self> {
        params.validate()?;
        tariff.validate()?;
        grid.validate(&band)?;
        let dt_gap = (params.dt_hours() - tariff.dt_hours).abs();
        if dt_gap > 1e-9 * tariff.dt_hours {
            return Err(Error::InvalidConfig(format!(
                "model step {} h differs from tariff step {} h",
                params.dt_hours(),
                tariff.dt_hours
            )));
        }
        if trace.len() < tariff.horizon {
            return Err(Error::LengthMismatch {
                what: "exterior trace",
                expected: tariff.horizon,
                actual: trace.len(),
            });
        }
        match &controls {
            ControlCandidates::Uniform { du, .. } => {
                if !(du.is_finite() && *du > 0.0) {
                    return Err(Error::InvalidConfig(format!("du = {du} must be positive")));
                }
            }
            ControlCandidates::PerStep(lists) => {
                if lists.len() != tariff.horizon {
                    return Err(Error::LengthMismatch {
                        what: "per-step control lists",
                        expected: tariff.horizon,
                        actual: lists.len(),
                    });
                }
            }
        }
        Ok(Self {
            params,
            tariff,
            trace,
            band,
            grid,
            controls,
        })
    }

    pub fn horizon(&self) -> usize {
        self.tariff.horizon
    }

    pub fn with_prices(&self, prices: Prices) -> Self {
        Self {
            tariff: self.tariff.with_prices(prices),
            ..self.clone()
        }
    }

    /// Grid used for a solve from `initial`: mirrored when allowed and the
    /// initial profile is symmetric.
    pub fn state_grid(&self, initial: &WallState) -> StateGrid {
        let mirrored = self.grid.exploit_symmetry && initial.is_symmetric();
        StateGrid::new(&self.grid, self.params.m, mirrored)
    }

    /// Candidate set-points at step `k` for surface temperature `t1`, sorted
    /// ascending. Empty when nothing in the band meets the cap.
    pub fn admissible_controls(&self, k: usize, t1: f64, gamma: f64) -> Vec<f64> {
        let mut out = Vec::new();
        self.admissible_into(k, t1, gamma, &mut out);
        out
    }

    fn admissible_into(&self, k: usize, t1: f64, gamma: f64, out: &mut Vec<f64>) {
        out.clear();
        let band = &self.band;
        match &self.controls {
            ControlCandidates::Uniform { du, .. } => {
                let span = band.t_max - band.t_min;
                let count = (span / du - 1e-9).ceil().max(0.0) as usize + 1;
                out.extend((0..count).map(|i| (band.t_min + i as f64 * du).min(band.t_max)));
            }
            ControlCandidates::PerStep(lists) => {
                out.extend(lists[k].iter().copied().filter(|&u| band.contains(u)));
                out.sort_by(f64::total_cmp);
                out.dedup();
            }
        }
        if !self.tariff.is_on_peak(k) || gamma == f64::INFINITY {
            return;
        }
        let t_ext = self.trace.temps()[k];
        if let ControlCandidates::Uniform {
            include_boundary: true,
            ..
        } = self.controls
        {
            let boundary = self.params.setpoint_for_power(t_ext, t1, gamma);
            if band.contains(boundary) {
                let pos = out.partition_point(|&u| u < boundary);
                if out.get(pos) != Some(&boundary) {
                    out.insert(pos, boundary);
                }
            }
        }
        out.retain(|&u| within_cap(self.params.hvac_power(t_ext, u, t1), gamma));
    }

    pub fn terminal_layer(&self, grid: &StateGrid, gamma: f64) -> ValueGrid {
        let charge = self.tariff.demand_charge(gamma / 1000.0);
        ValueGrid {
            step: self.horizon(),
            values: vec![charge; grid.len()],
        }
    }

    /// Best set-point and its cost-to-go from `wall` at step `k`, given the
    /// next layer. `None` when no candidate has a finite value.
    fn minimize_at(
        &self,
        grid: &StateGrid,
        next: &ValueGrid,
        k: usize,
        wall: &[f64],
        gamma: f64,
        scratch: &mut Scratch,
    ) -> (Option<(f64, f64)>, usize) {
        let t1 = wall[0];
        let t_ext = self.trace.temps()[k];
        self.admissible_into(k, t1, gamma, &mut scratch.candidates);
        let mut best: Option<(f64, f64)> = None;
        let mut clamps = 0;
        for &u in &scratch.candidates {
            let stage = self
                .tariff
                .stage_cost(k, self.params.hvac_power(t_ext, u, t1));
            self.params.step_into(wall, u, &mut scratch.successor);
            let (tail, clamped) = grid.interpolate(&next.values, &scratch.successor);
            clamps += clamped as usize;
            let total = stage + tail;
            if !total.is_finite() {
                continue;
            }
            match best {
                Some((_, v)) if !improves(total, v) => {}
                _ => best = Some((u, total)),
            }
        }
        (best, clamps)
    }

    /// One Bellman step: layer `next.step` to layer `next.step - 1`.
    pub fn bellman_backup(&self, grid: &StateGrid, next: &ValueGrid, gamma: f64) -> Backup {
        assert!(next.step >= 1, "cannot back up past the first step");
        let k = next.step - 1;
        let m = self.params.m;
        let results: Vec<(f64, f64, usize)> = parallel::install(|| {
            (0..grid.len())
                .into_par_iter()
                .map_init(
                    || (Scratch::new(m), vec![0.0; m]),
                    |(scratch, wall), node| {
                        grid.wall_at(node, wall);
                        match self.minimize_at(grid, next, k, wall, gamma, scratch) {
                            (Some((u, v)), c) => (v, u, c),
                            (None, c) => (f64::INFINITY, f64::NAN, c),
                        }
                    },
                )
                .collect()
        });
        let mut values = Vec::with_capacity(results.len());
        let mut controls = Vec::with_capacity(results.len());
        let mut clamps = 0;
        for (v, u, c) in results {
            values.push(v);
            controls.push(u);
            clamps += c;
        }
        Backup {
            layer: ValueGrid { step: k, values },
            controls,
            clamps,
        }
    }

    /// Full backward sweep at cap `gamma`, evaluated at `initial`.
    pub fn solve_fixed_gamma(&self, gamma: f64, initial: &WallState) -> Result<FixedGammaSolution> {
        self.check_initial(initial)?;
        let grid = self.state_grid(initial);
        let n = self.horizon();
        let mut layers = Vec::with_capacity(n + 1);
        let mut controls = Vec::with_capacity(n);
        let mut clamps = 0;
        layers.push(self.terminal_layer(&grid, gamma));
        for _ in 0..n {
            let backup = self.bellman_backup(&grid, layers.last().unwrap(), gamma);
            clamps += backup.clamps;
            layers.push(backup.layer);
            controls.push(backup.controls);
        }
        layers.reverse();
        controls.reverse();
        if clamps > 0 {
            warn!("gamma = {gamma:.1} W: {clamps} successor states clamped into the grid box");
        }
        let (value, clamped) = grid.interpolate(&layers[0].values, initial.temps());
        if clamped {
            return Err(Error::InvalidConfig(
                "initial wall state lies outside the state grid".into(),
            ));
        }
        Ok(FixedGammaSolution {
            gamma,
            value,
            feasible: value.is_finite(),
            policy: Policy {
                gamma,
                grid,
                layers,
                controls,
            },
            clamps,
        })
    }

    /// Greedy forward pass through a solved policy.
    pub fn rollout(&self, policy: &Policy, initial: &WallState) -> Result<Rollout> {
        self.check_initial(initial)?;
        let n = self.horizon();
        let m = self.params.m;
        let gamma = policy.gamma;
        let mut scratch = Scratch::new(m);
        let mut states = Vec::with_capacity(n + 1);
        let mut controls = Vec::with_capacity(n);
        let mut powers = Vec::with_capacity(n);
        let mut clamps = 0;
        let mut wall = initial.temps().to_vec();
        states.push(initial.clone());
        for k in 0..n {
            let (best, c) = self.minimize_at(
                &policy.grid,
                &policy.layers[k + 1],
                k,
                &wall,
                gamma,
                &mut scratch,
            );
            clamps += c;
            let (u, _) = best.ok_or(Error::RolloutStuck { step: k })?;
            let g = self.params.hvac_power(self.trace.temps()[k], u, wall[0]);
            if self.tariff.is_on_peak(k) && !within_cap(g, gamma) {
                return Err(Error::CapViolated {
                    step: k,
                    power: g,
                    gamma,
                });
            }
            self.params.step_into(&wall, u, &mut scratch.successor);
            wall.copy_from_slice(&scratch.successor);
            controls.push(u);
            powers.push(g);
            states.push(WallState::new(wall.clone())?);
        }
        let bill = total_bill(&self.tariff, &powers)?;
        Ok(Rollout {
            gamma,
            controls,
            states,
            powers,
            bill,
            clamps,
        })
    }

    fn check_initial(&self, initial: &WallState) -> Result<()> {
        if initial.len() != self.params.m {
            return Err(Error::LengthMismatch {
                what: "initial wall state",
                expected: self.params.m,
                actual: initial.len(),
            });
        }
        Ok(())
    }
}

struct Scratch {
    candidates: Vec<f64>,
    successor: Vec<f64>,
}

impl Scratch {
    fn new(m: usize) -> Self {
        Self {
            candidates: Vec::with_capacity(64),
            successor: vec![0.0; m],
        }
    }
}

#[cfg(test)]
mod tests;
