use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baselines::DEFAULT_PRECOOL_HOURS;
use crate::dp::{ComfortBand, ControlCandidates, GammaMode, GammaSearchConfig, GridSpec};
use crate::error::{Error, Result};
use crate::pricing::{PricePoint, PriceSearchConfig};
use crate::tariff::{DemandAccrual, MarginalCosts, Prices, TariffSchedule};
use crate::thermal::{reference, BuildingParams, WallState};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Optimal,
    Constant,
    Precool,
    PriceOptimization,
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::Optimal => "optimal",
            Strategy::Constant => "constant",
            Strategy::Precool => "precool",
            Strategy::PriceOptimization => "price_optimization",
        }
    }
}

/// One scenario as a flat set of keys. Every key has a default; the defaults
/// describe the reference building under the APS tariff over three days.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,

    pub alpha: f64,
    pub l_in: f64,
    pub r_e: f64,
    pub c_in: f64,
    pub dx: f64,
    pub dt_hours: f64,
    pub clamp_power_at_zero: bool,

    pub t_min: f64,
    pub t_max: f64,

    pub p_on: f64,
    pub p_off: f64,
    pub p_d: f64,
    pub t_on_hours: f64,
    pub t_off_hours: f64,
    pub days: usize,
    pub demand_term: DemandAccrual,

    pub marginal_energy: f64,
    pub marginal_capacity: f64,

    /// Uniform initial wall temperature; `t_max` when unset.
    pub t_init: Option<f64>,
    /// Explicit initial profile, one value per interior node.
    pub t_init_profile: Option<Vec<f64>>,

    pub grid_nodes: usize,
    pub grid_margin: f64,
    pub du: f64,
    pub include_boundary_control: bool,
    pub exploit_symmetry: bool,

    pub gamma_lo_w: f64,
    pub gamma_hi_w: f64,
    pub b_max: u32,
    pub gamma_mode: GammaMode,
    pub scan_points: usize,

    pub precool_hours: f64,

    /// Initial simplex demand price; proportional to the tariff when unset.
    pub price_init_demand: Option<f64>,
    pub price_init_on: Option<f64>,
    pub price_step_demand: f64,
    pub price_step_on: f64,
    pub price_epsilon: f64,
    pub diagonal_only: bool,
    pub shrink_on_fail: bool,
    pub max_price_iterations: usize,

    pub exterior_csv: Option<PathBuf>,
    pub output_dir: Option<PathBuf>,
    pub strategies: Vec<Strategy>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        let gamma = GammaSearchConfig::default();
        let search = PriceSearchConfig::default();
        Self {
            name: "scenario".into(),
            alpha: reference::ALPHA,
            l_in: reference::L_IN,
            r_e: reference::R_E,
            c_in: reference::C_IN,
            dx: reference::DX,
            dt_hours: 1.0,
            clamp_power_at_zero: false,
            t_min: 22.0,
            t_max: 28.0,
            p_on: 0.089,
            p_off: 0.044,
            p_d: 13.5,
            t_on_hours: 12.0,
            t_off_hours: 19.0,
            days: 3,
            demand_term: DemandAccrual::PerDay,
            marginal_energy: 0.0814,
            marginal_capacity: 59.76,
            t_init: None,
            t_init_profile: None,
            grid_nodes: GridSpec::DEFAULT_NODES,
            grid_margin: GridSpec::DEFAULT_MARGIN,
            du: ControlCandidates::DEFAULT_DU,
            include_boundary_control: true,
            exploit_symmetry: true,
            gamma_lo_w: gamma.gamma_lo,
            gamma_hi_w: gamma.gamma_hi,
            b_max: gamma.b_max,
            gamma_mode: gamma.mode,
            scan_points: gamma.scan_points,
            precool_hours: DEFAULT_PRECOOL_HOURS,
            price_init_demand: None,
            price_init_on: None,
            price_step_demand: search.step_demand,
            price_step_on: search.step_on,
            price_epsilon: search.epsilon,
            diagonal_only: search.diagonal_only,
            shrink_on_fail: search.shrink_on_fail,
            max_price_iterations: search.max_iterations,
            exterior_csv: None,
            output_dir: None,
            strategies: vec![Strategy::Optimal, Strategy::Constant, Strategy::Precool],
        }
    }
}

/// Parses an override value as TOML, falling back to a bare string.
fn override_value(raw: &str) -> toml::Value {
    match format!("v = {raw}").parse::<toml::Table>() {
        Ok(mut t) => t.remove("v").expect("key just parsed"),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

impl ScenarioConfig {
    /// Parses `text` and applies `key=value` overrides on top.
    pub fn from_toml_with_overrides(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut table: toml::Table = text.parse()?;
        for (key, raw) in overrides {
            table.insert(key.clone(), override_value(raw));
        }
        let cfg: Self = table.try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_with_overrides(text, &[])
    }

    /// Reads a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingFile {
                path: path.to_path_buf(),
            });
        }
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml_with_overrides(&text, overrides)?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        for p in [&mut self.exterior_csv, &mut self.output_dir]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.building()?;
        self.band()?;
        let tariff = self.tariff()?;
        self.grid().validate(&self.band()?)?;
        self.gamma_search().validate()?;
        self.price_search().validate()?;
        self.marginal_costs()?;
        self.initial_prices()?;
        let initial = self.initial_wall()?;
        let band = self.band()?;
        let grid = self.grid();
        if initial.temps().iter().any(|&t| t < grid.lo || t > grid.hi) {
            return Err(Error::InvalidConfig(format!(
                "initial wall temperatures must lie inside the state grid [{}, {}]",
                grid.lo, grid.hi
            )));
        }
        if self.du <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "du = {} must be positive",
                self.du
            )));
        }
        if self.days == 0 {
            return Err(Error::InvalidConfig("days must be at least 1".into()));
        }
        debug_assert!(band.t_min <= band.t_max && tariff.horizon > 0);
        Ok(())
    }

    pub fn building(&self) -> Result<BuildingParams> {
        let mut p = BuildingParams::with_spacing(
            self.alpha,
            self.l_in,
            self.r_e,
            self.c_in,
            self.dx,
            self.dt_hours * 3600.0,
        )?;
        p.clamp_power_at_zero = self.clamp_power_at_zero;
        Ok(p)
    }

    pub fn band(&self) -> Result<ComfortBand> {
        ComfortBand::new(self.t_min, self.t_max)
    }

    pub fn horizon(&self) -> usize {
        (self.days as f64 * 24.0 / self.dt_hours).round() as usize
    }

    pub fn prices(&self) -> Prices {
        Prices::new(self.p_on, self.p_off, self.p_d)
    }

    pub fn tariff(&self) -> Result<TariffSchedule> {
        Ok(TariffSchedule::new(
            self.prices(),
            self.t_on_hours,
            self.t_off_hours,
            self.dt_hours,
            self.horizon(),
        )?
        .with_accrual(self.demand_term))
    }

    pub fn marginal_costs(&self) -> Result<MarginalCosts> {
        MarginalCosts::new(self.marginal_energy, self.marginal_capacity)
    }

    pub fn initial_wall(&self) -> Result<WallState> {
        let m = self.building()?.m;
        match (&self.t_init_profile, self.t_init) {
            (Some(profile), _) => {
                if profile.len() != m {
                    return Err(Error::LengthMismatch {
                        what: "t_init_profile",
                        expected: m,
                        actual: profile.len(),
                    });
                }
                WallState::new(profile.clone())
            }
            (None, Some(t)) => WallState::new(vec![t; m]),
            (None, None) => Ok(WallState::uniform(m, self.t_max)),
        }
    }

    pub fn grid(&self) -> GridSpec {
        GridSpec {
            lo: self.t_min - self.grid_margin,
            hi: self.t_max + self.grid_margin,
            n_nodes: self.grid_nodes,
            exploit_symmetry: self.exploit_symmetry,
        }
    }

    pub fn controls(&self) -> ControlCandidates {
        ControlCandidates::Uniform {
            du: self.du,
            include_boundary: self.include_boundary_control,
        }
    }

    pub fn gamma_search(&self) -> GammaSearchConfig {
        GammaSearchConfig {
            gamma_lo: self.gamma_lo_w,
            gamma_hi: self.gamma_hi_w,
            b_max: self.b_max,
            mode: self.gamma_mode,
            scan_points: self.scan_points,
        }
    }

    pub fn price_search(&self) -> PriceSearchConfig {
        PriceSearchConfig {
            step_demand: self.price_step_demand,
            step_on: self.price_step_on,
            epsilon: self.price_epsilon,
            diagonal_only: self.diagonal_only,
            shrink_on_fail: self.shrink_on_fail,
            max_iterations: self.max_price_iterations,
            ..PriceSearchConfig::default()
        }
    }

    pub fn initial_prices(&self) -> Result<PricePoint> {
        match (self.price_init_demand, self.price_init_on) {
            (Some(d), Some(on)) => PricePoint::on_simplex(d, on),
            (None, None) => PricePoint::proportional_to(self.prices()),
            _ => Err(Error::InvalidConfig(
                "set both price_init_demand and price_init_on, or neither".into(),
            )),
        }
    }
}
