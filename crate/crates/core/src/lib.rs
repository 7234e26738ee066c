//! Thermostat programming for buildings with interior thermal mass under
//! time-of-use tariffs with a demand charge.
//!
//! The wall is a 1-D heat equation discretized on `M` interior nodes. A
//! backward DP over gridded wall states finds set-point schedules that
//! minimize the electricity bill at a given on-peak power cap, and a scalar
//! search picks the cap. On top of the user problem, a compass search over
//! normalized prices minimizes the utility's production cost subject to
//! revenue neutrality.
//!
//! ```no_run
//! use thermostat_core::scenario::{Scenario, ScenarioConfig};
//!
//! let scenario = Scenario::load(ScenarioConfig::default())?;
//! let optimal = scenario.run_optimal()?;
//! println!("bill ${:.2}, peak {:.3} kW", optimal.bill.total, optimal.peak_kw);
//! # Ok::<(), thermostat_core::Error>(())
//! ```

pub mod baselines;
pub mod dp;
pub mod error;
pub mod oracle;
mod parallel;
pub mod pricing;
pub mod scenario;
pub mod tariff;
pub mod thermal;

pub use dp::{ComfortBand, ControlCandidates, GammaMode, GammaSearchConfig, GridSpec, UserProblem};
pub use error::{Error, Result};
pub use parallel::THREADS_ENV;
pub use pricing::{pattern_search, PricePoint, PriceSearchConfig, PricingResult};
pub use tariff::{MarginalCosts, Prices, TariffSchedule};
pub use thermal::{BuildingParams, ExteriorTrace, WallState};
