//! Interior-wall heat conduction and HVAC power.
//!
//! The wall is a 1-D rod of width `l_in` with both faces held at the
//! controlled air temperature `u`. Its interior is sampled at `m` points
//! spaced `dx = l_in / (m + 1)` apart and advanced with forward Euler:
//!
//! ```text
//! T[k+1] = (I + A dt) T[k] + B dt u[k]
//! ```
//!
//! where `A` is the scaled second-difference matrix and `B` injects the
//! boundary value into the first and last nodes. HVAC power is the exterior
//! loss through `r_e` plus the flux drawn into the wall surface.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest admissible `alpha * dt / dx^2` for the explicit update.
pub const STABILITY_LIMIT: f64 = 0.5;

/// Constants of the reference building.
pub mod reference {
    pub const ALPHA: f64 = 8.3e-7;
    pub const L_IN: f64 = 0.4;
    pub const R_E: f64 = 0.0015;
    pub const C_IN: f64 = 45.0;
    pub const DX: f64 = 0.1;
}

/// Physical constants of the building and the discretization.
///
/// `alpha` already folds conductivity, density and heat capacity together;
/// `r_e` folds the exterior wall geometry; `c_in` folds the interior wall
/// area. Only these lumped values enter the model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingParams {
    /// Thermal diffusivity, m²/s.
    pub alpha: f64,
    /// Interior wall width, m.
    pub l_in: f64,
    /// Exterior thermal resistance, K/W.
    pub r_e: f64,
    /// Interior thermal capacitance, W·m/K.
    pub c_in: f64,
    /// Number of interior grid points.
    pub m: usize,
    /// Spatial step, m. Always `l_in / (m + 1)`.
    pub dx: f64,
    /// Time step, s.
    pub dt: f64,
    /// Report negative HVAC power as zero. Off by default.
    #[serde(default)]
    pub clamp_power_at_zero: bool,
}

impl BuildingParams {
    pub fn new(alpha: f64, l_in: f64, r_e: f64, c_in: f64, m: usize, dt: f64) -> Result<Self> {
        let params = Self {
            alpha,
            l_in,
            r_e,
            c_in,
            m,
            dx: l_in / (m as f64 + 1.0),
            dt,
            clamp_power_at_zero: false,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds from a spatial step instead of a point count. `l_in / dx` must
    /// be an integer of at least 2.
    pub fn with_spacing(
        alpha: f64,
        l_in: f64,
        r_e: f64,
        c_in: f64,
        dx: f64,
        dt: f64,
    ) -> Result<Self> {
        if !(dx > 0.0 && l_in > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dx = {dx} and l_in = {l_in} must be positive"
            )));
        }
        let cells = l_in / dx;
        let rounded = cells.round();
        if (cells - rounded).abs() > 1e-9 * cells.max(1.0) || rounded < 2.0 {
            return Err(Error::InvalidParams(format!(
                "l_in / dx = {cells} must be an integer >= 2"
            )));
        }
        Self::new(alpha, l_in, r_e, c_in, rounded as usize - 1, dt)
    }

    /// Reference building at spatial step 0.1 m.
    pub fn reference(dt: f64) -> Result<Self> {
        use reference::*;
        Self::with_spacing(ALPHA, L_IN, R_E, C_IN, DX, dt)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("alpha", self.alpha),
            ("l_in", self.l_in),
            ("r_e", self.r_e),
            ("c_in", self.c_in),
            ("dx", self.dx),
            ("dt", self.dt),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} = {v} must be finite and positive"
                )));
            }
        }
        if self.m == 0 {
            return Err(Error::InvalidParams("m must be at least 1".into()));
        }
        let expected_dx = self.l_in / (self.m as f64 + 1.0);
        if self.dx != expected_dx {
            return Err(Error::InvalidParams(format!(
                "dx = {} but l_in / (m + 1) = {expected_dx}",
                self.dx
            )));
        }
        let ratio = self.stability_ratio();
        if ratio > STABILITY_LIMIT {
            return Err(Error::Unstable { ratio });
        }
        Ok(())
    }

    /// `alpha * dt / dx^2`.
    pub fn stability_ratio(&self) -> f64 {
        self.alpha * self.dt / (self.dx * self.dx)
    }

    pub fn dt_hours(&self) -> f64 {
        self.dt / 3600.0
    }

    /// Conductance of the wall surface term, `2 c_in / dx`, W/K.
    pub fn surface_conductance(&self) -> f64 {
        2.0 * self.c_in / self.dx
    }

    /// HVAC power for an exterior temperature, set-point and first wall node.
    #[inline]
    pub fn hvac_power(&self, t_ext: f64, u: f64, t1: f64) -> f64 {
        let g = (t_ext - u) / self.r_e + self.surface_conductance() * (t1 - u);
        if self.clamp_power_at_zero {
            g.max(0.0)
        } else {
            g
        }
    }

    /// Set-point at which the unclamped power equals `cap`. Power decreases in
    /// `u`, so every `u` at or above this value meets the cap.
    pub fn setpoint_for_power(&self, t_ext: f64, t1: f64, cap: f64) -> f64 {
        let k_e = 1.0 / self.r_e;
        let k_s = self.surface_conductance();
        (t_ext * k_e + k_s * t1 - cap) / (k_e + k_s)
    }

    /// One explicit step written into `out`. `temps` and `out` must both have
    /// length `m`.
    #[inline]
    pub fn step_into(&self, temps: &[f64], u: f64, out: &mut [f64]) {
        let r = self.stability_ratio();
        let centre = 1.0 - 2.0 * r;
        let m = temps.len();
        for i in 0..m {
            let left = if i == 0 { u } else { temps[i - 1] };
            let right = if i + 1 == m { u } else { temps[i + 1] };
            out[i] = centre * temps[i] + r * (left + right);
        }
    }
}

/// Wall temperatures at the interior grid points, °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallState(Vec<f64>);

impl WallState {
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        if temps.is_empty() {
            return Err(Error::InvalidParams("wall state is empty".into()));
        }
        if let Some(bad) = temps.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite wall temperature {bad}"
            )));
        }
        Ok(Self(temps))
    }

    pub fn uniform(m: usize, temp: f64) -> Self {
        Self(vec![temp; m])
    }

    pub fn temps(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Temperature at the node adjacent to the wall surface.
    pub fn surface(&self) -> f64 {
        self.0[0]
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.0.len();
        (0..n / 2).all(|i| self.0[i] == self.0[n - 1 - i])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    fn check(&self, params: &BuildingParams) -> Result<()> {
        if self.0.len() != params.m {
            return Err(Error::LengthMismatch {
                what: "wall state",
                expected: params.m,
                actual: self.0.len(),
            });
        }
        Ok(())
    }
}

/// Exterior temperature sampled at the model time step, °C.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExteriorTrace(Vec<f64>);

impl ExteriorTrace {
    pub fn new(temps: Vec<f64>) -> Result<Self> {
        if let Some(bad) = temps.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "non-finite exterior temperature {bad}"
            )));
        }
        Ok(Self(temps))
    }

    pub fn constant(len: usize, temp: f64) -> Self {
        Self(vec![temp; len])
    }

    pub fn temps(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn at(&self, k: usize) -> Result<f64> {
        self.0.get(k).copied().ok_or(Error::IndexOutOfRange {
            index: k,
            len: self.0.len(),
        })
    }
}

/// Continuous-time linear model `dT/dt = A T + B u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub a: DMatrix<f64>,
    pub b: DVector<f64>,
}

impl Dynamics {
    /// `I + A dt`.
    pub fn transition(&self, dt: f64) -> DMatrix<f64> {
        DMatrix::identity(self.a.nrows(), self.a.ncols()) + &self.a * dt
    }
}

pub fn build_dynamics(params: &BuildingParams) -> Result<Dynamics> {
    params.validate()?;
    let m = params.m;
    let s = params.alpha / (params.dx * params.dx);
    let a = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            -2.0 * s
        } else if i.abs_diff(j) == 1 {
            s
        } else {
            0.0
        }
    });
    let mut b = DVector::zeros(m);
    b[0] += s;
    b[m - 1] += s;
    Ok(Dynamics { a, b })
}

pub fn step(params: &BuildingParams, state: &WallState, u: f64) -> Result<WallState> {
    state.check(params)?;
    if !u.is_finite() {
        return Err(Error::InvalidParams(format!("non-finite set-point {u}")));
    }
    let mut out = vec![0.0; params.m];
    params.step_into(state.temps(), u, &mut out);
    Ok(WallState(out))
}

/// HVAC power at step `k`, W. Signed unless the params ask for clamping.
pub fn power(
    params: &BuildingParams,
    k: usize,
    u: f64,
    t1: f64,
    trace: &ExteriorTrace,
) -> Result<f64> {
    Ok(params.hvac_power(trace.at(k)?, u, t1))
}

/// States `T[0..=N]` and powers `g[0..N]` of a forward simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<WallState>,
    pub powers: Vec<f64>,
}

pub fn simulate(
    params: &BuildingParams,
    initial: &WallState,
    controls: &[f64],
    trace: &ExteriorTrace,
) -> Result<Trajectory> {
    initial.check(params)?;
    if trace.len() < controls.len() {
        return Err(Error::LengthMismatch {
            what: "exterior trace",
            expected: controls.len(),
            actual: trace.len(),
        });
    }
    let mut states = Vec::with_capacity(controls.len() + 1);
    let mut powers = Vec::with_capacity(controls.len());
    states.push(initial.clone());
    for (k, &u) in controls.iter().enumerate() {
        let current = &states[k];
        powers.push(power(params, k, u, current.surface(), trace)?);
        let next = step(params, current, u)?;
        states.push(next);
    }
    Ok(Trajectory { states, powers })
}

/// Simulation that also checks the control count against a horizon.
pub fn simulate_horizon(
    params: &BuildingParams,
    initial: &WallState,
    controls: &[f64],
    trace: &ExteriorTrace,
    horizon: usize,
) -> Result<Trajectory> {
    if controls.len() != horizon {
        return Err(Error::LengthMismatch {
            what: "control sequence",
            expected: horizon,
            actual: controls.len(),
        });
    }
    simulate(params, initial, controls, trace)
}
