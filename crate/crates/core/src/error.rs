use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid building parameters: {0}")]
    InvalidParams(String),

    #[error(
        "explicit update is unstable: alpha*dt/dx^2 = {ratio:.6} exceeds 1/2 \
         (reduce dt or increase dx)"
    )]
    Unstable { ratio: f64 },

    #[error("invalid tariff: {0}")]
    InvalidTariff(String),

    #[error("invalid comfort band: T_min = {t_min} must be below T_max = {t_max}")]
    InvalidBand { t_min: f64, t_max: f64 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("length mismatch for {what}: expected {expected}, got {actual}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("step index {index} out of range (horizon has {len} steps)")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("horizon contains no on-peak step")]
    NoOnPeakSteps,

    #[error("user problem infeasible at gamma = {gamma} W")]
    Infeasible { gamma: f64 },

    #[error(
        "rollout broke the peak cap at step {step}: {power:.3} W > gamma = {gamma:.3} W \
         (state grid too coarse?)"
    )]
    CapViolated { step: usize, power: f64, gamma: f64 },

    #[error("rollout found no admissible control with finite cost-to-go at step {step}")]
    RolloutStuck { step: usize },

    #[error("bill is {0} at the candidate prices; cannot rescale to revenue neutrality")]
    DegenerateBill(f64),

    #[error("initial prices off the simplex: p_d0 + p_on0 = {0} must be < 1 with both >= 0")]
    InfeasibleInitialPrices(f64),

    #[error("no feasible control sequence for this instance")]
    OracleInfeasible,

    #[error("{path}: file not found")]
    MissingFile { path: PathBuf },

    #[error("{path}:{line}: non-numeric cell {cell:?}")]
    NonNumeric {
        path: PathBuf,
        line: usize,
        cell: String,
    },

    #[error("{path}:{line}: hours must be strictly increasing ({prev} then {next})")]
    NonMonotoneHours {
        path: PathBuf,
        line: usize,
        prev: f64,
        next: f64,
    },

    #[error("{path}: trace covers {available_hours} h but the horizon needs {needed_hours} h")]
    TraceTooShort {
        path: PathBuf,
        available_hours: f64,
        needed_hours: f64,
    },

    #[error("{path}: malformed CSV: {msg}")]
    MalformedCsv { path: PathBuf, msg: String },

    #[error("scenario {scenario:?}, strategy {strategy}: {source}")]
    Scenario {
        scenario: String,
        strategy: String,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}
