//! Exhaustive solver for tiny user problems.
//!
//! Every control sequence drawn from the per-step candidate lists is
//! simulated, screened against the comfort band and the on-peak cap, and
//! scored with the sequence-form cost-to-go from step 0. The minimum is what
//! the backward recursion must reproduce.
//!
//! Grid-aligned instances are built so that the wall update maps every
//! lattice temperature onto a lattice temperature (`alpha dt / dx^2 = 1/2`
//! with a single node makes the next wall temperature equal the set-point),
//! which removes interpolation error from the comparison.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dp::{ComfortBand, ControlCandidates, GridSpec, UserProblem, CAP_ABS_TOL, CAP_REL_TOL};
use crate::error::{Error, Result};
use crate::tariff::{oracle_cost_to_go, Prices, TariffSchedule};
use crate::thermal::{BuildingParams, ExteriorTrace, WallState};

pub const MAX_WALL_NODES: usize = 2;
pub const MAX_HORIZON: usize = 6;
pub const MAX_CANDIDATES: usize = 5;

const TIE_REL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct TinyInstance {
    pub params: BuildingParams,
    pub tariff: TariffSchedule,
    pub trace: ExteriorTrace,
    pub band: ComfortBand,
    pub gamma: f64,
    pub initial: WallState,
    /// Candidate set-points for each step.
    pub candidates: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleSolution {
    pub value: f64,
    pub controls: Vec<f64>,
    /// Sequences that passed the band and cap screens.
    pub feasible_sequences: usize,
    pub sequences: usize,
}

impl TinyInstance {
    pub fn validate(&self) -> Result<()> {
        if self.params.m > MAX_WALL_NODES {
            return Err(Error::InvalidConfig(format!(
                "oracle supports at most {MAX_WALL_NODES} wall nodes, got {}",
                self.params.m
            )));
        }
        if self.tariff.horizon > MAX_HORIZON {
            return Err(Error::InvalidConfig(format!(
                "oracle supports at most {MAX_HORIZON} steps, got {}",
                self.tariff.horizon
            )));
        }
        if self.candidates.len() != self.tariff.horizon {
            return Err(Error::LengthMismatch {
                what: "candidate lists",
                expected: self.tariff.horizon,
                actual: self.candidates.len(),
            });
        }
        if let Some(list) = self.candidates.iter().find(|l| l.len() > MAX_CANDIDATES) {
            return Err(Error::InvalidConfig(format!(
                "oracle supports at most {MAX_CANDIDATES} candidates per step, got {}",
                list.len()
            )));
        }
        if self.initial.len() != self.params.m {
            return Err(Error::LengthMismatch {
                what: "initial wall state",
                expected: self.params.m,
                actual: self.initial.len(),
            });
        }
        Ok(())
    }

    /// The same instance as a DP problem with explicit per-step candidates.
    pub fn to_user_problem(&self, grid: GridSpec) -> Result<UserProblem> {
        UserProblem::new(
            self.params.clone(),
            self.tariff.clone(),
            self.trace.clone(),
            self.band,
            grid,
            ControlCandidates::PerStep(self.candidates.clone()),
        )
    }
}

fn meets_cap(power: f64, gamma: f64) -> bool {
    power <= gamma + CAP_REL_TOL * gamma.abs() + CAP_ABS_TOL
}

/// Exhaustive minimum over all candidate sequences. Ties go to the
/// lexicographically smallest sequence.
pub fn enumerate_optimum(inst: &TinyInstance) -> Result<OracleSolution> {
    inst.validate()?;
    let n = inst.tariff.horizon;
    let lists: Vec<Vec<f64>> = inst
        .candidates
        .iter()
        .map(|l| {
            let mut l: Vec<f64> = l
                .iter()
                .copied()
                .filter(|&u| inst.band.contains(u))
                .collect();
            l.sort_by(f64::total_cmp);
            l.dedup();
            l
        })
        .collect();
    let sequences: usize = lists.iter().map(Vec::len).product();
    if sequences == 0 {
        return Err(Error::OracleInfeasible);
    }

    let mut digits = vec![0usize; n];
    let mut controls = vec![0.0; n];
    let mut surface = vec![0.0; n + 1];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut feasible = 0;
    for _ in 0..sequences {
        for k in 0..n {
            controls[k] = lists[k][digits[k]];
        }
        if let Some(value) = score(inst, &controls, &mut surface)? {
            feasible += 1;
            let better = match &best {
                None => true,
                Some((v, _)) => value < v - TIE_REL * v.abs().max(1.0),
            };
            if better {
                best = Some((value, controls.clone()));
            }
        }
        // odometer, last step fastest, so sequences come in lexicographic order
        for k in (0..n).rev() {
            digits[k] += 1;
            if digits[k] < lists[k].len() {
                break;
            }
            digits[k] = 0;
        }
    }
    let (value, controls) = best.ok_or(Error::OracleInfeasible)?;
    Ok(OracleSolution {
        value,
        controls,
        feasible_sequences: feasible,
        sequences,
    })
}

/// Sequence-form cost, or `None` when the sequence breaks the cap.
fn score(inst: &TinyInstance, controls: &[f64], surface: &mut [f64]) -> Result<Option<f64>> {
    let params = &inst.params;
    let mut wall = inst.initial.temps().to_vec();
    let mut next = vec![0.0; wall.len()];
    for (k, &u) in controls.iter().enumerate() {
        surface[k] = wall[0];
        if inst.tariff.is_on_peak(k) {
            let g = params.hvac_power(inst.trace.at(k)?, u, wall[0]);
            if !meets_cap(g, inst.gamma) {
                return Ok(None);
            }
        }
        params.step_into(&wall, u, &mut next);
        std::mem::swap(&mut wall, &mut next);
    }
    surface[controls.len()] = wall[0];
    oracle_cost_to_go(
        &inst.tariff,
        params,
        &inst.trace,
        0,
        controls,
        surface,
        inst.gamma,
    )
    .map(Some)
}

/// Lattice used by [`random_grid_aligned`]: integer temperatures 20..=30 °C.
pub fn aligned_grid() -> GridSpec {
    GridSpec {
        lo: 20.0,
        hi: 30.0,
        n_nodes: 11,
        exploit_symmetry: true,
    }
}

/// Single-node wall whose update sends the wall temperature to the
/// set-point exactly, on a six-step (4 h) day with on-peak steps 3 and 4.
pub fn aligned_params() -> BuildingParams {
    // alpha dt / dx^2 = 0.5 * 14400 / 120^2 = 1/2 exactly; 2 c_in / dx = 900 W/K
    BuildingParams::new(0.5, 240.0, 0.0015, 54_000.0, 1, 14_400.0)
        .expect("aligned parameters are valid")
}

/// Random grid-aligned instance with 4 to 6 steps and at most
/// `max_candidates` lattice set-points per step.
pub fn random_grid_aligned<R: Rng + ?Sized>(rng: &mut R, max_candidates: usize) -> TinyInstance {
    let params = aligned_params();
    let horizon = rng.gen_range(4..=MAX_HORIZON);
    let prices = Prices::new(
        round3(rng.gen_range(0.05..0.2)),
        round3(rng.gen_range(0.02..0.1)),
        round3(rng.gen_range(0.0..20.0)),
    );
    let tariff =
        TariffSchedule::new(prices, 12.0, 20.0, 4.0, horizon).expect("aligned tariff is valid");
    let trace = ExteriorTrace::new(
        (0..horizon)
            .map(|_| (rng.gen_range(28.0..42.0_f64) * 10.0).round() / 10.0)
            .collect(),
    )
    .expect("finite trace");
    let band = ComfortBand::new(22.0, 28.0).expect("valid band");
    let lattice: Vec<f64> = (22..=28).map(f64::from).collect();
    let candidates = (0..horizon)
        .map(|_| {
            let count = rng.gen_range(1..=max_candidates.min(MAX_CANDIDATES));
            let mut picks: Vec<f64> = lattice.choose_multiple(rng, count).copied().collect();
            picks.sort_by(f64::total_cmp);
            picks
        })
        .collect();
    let initial = WallState::uniform(1, f64::from(rng.gen_range(20..=30)));
    TinyInstance {
        params,
        tariff,
        trace,
        band,
        gamma: rng.gen_range(2000.0..16_000.0_f64).round(),
        initial,
        candidates,
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

/// Outcome of comparing the DP against the oracle on one instance.
#[derive(Debug, Clone)]
pub struct Certification {
    pub dp_value: f64,
    pub oracle_value: Option<f64>,
    pub dp_controls: Option<Vec<f64>>,
    pub oracle_controls: Option<Vec<f64>>,
    pub values_agree: bool,
    pub controls_agree: bool,
}

impl Certification {
    pub fn passed(&self) -> bool {
        self.values_agree && self.controls_agree
    }

    pub fn feasible(&self) -> bool {
        self.oracle_value.is_some()
    }
}

/// Solves `inst` both ways and compares value (to `rel_tol`) and the
/// realized control sequence.
pub fn certify(inst: &TinyInstance, grid: GridSpec, rel_tol: f64) -> Result<Certification> {
    let problem = inst.to_user_problem(grid)?;
    let dp = problem.solve_fixed_gamma(inst.gamma, &inst.initial)?;
    let oracle = match enumerate_optimum(inst) {
        Ok(sol) => Some(sol),
        Err(Error::OracleInfeasible) => None,
        Err(e) => return Err(e),
    };
    let cert = match oracle {
        None => Certification {
            dp_value: dp.value,
            oracle_value: None,
            dp_controls: None,
            oracle_controls: None,
            values_agree: !dp.feasible,
            controls_agree: true,
        },
        Some(sol) => {
            let rollout = if dp.feasible {
                Some(problem.rollout(&dp.policy, &inst.initial)?.controls)
            } else {
                None
            };
            let scale = sol.value.abs().max(1e-12);
            Certification {
                dp_value: dp.value,
                oracle_value: Some(sol.value),
                values_agree: dp.feasible && (dp.value - sol.value).abs() <= rel_tol * scale,
                controls_agree: rollout.as_deref() == Some(sol.controls.as_slice()),
                dp_controls: rollout,
                oracle_controls: Some(sol.controls),
            }
        }
    };
    Ok(cert)
}
