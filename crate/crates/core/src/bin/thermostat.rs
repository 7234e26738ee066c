use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use thermostat_core::oracle::{aligned_grid, certify, random_grid_aligned, MAX_CANDIDATES};
use thermostat_core::scenario::{
    emit_results, render_report, Scenario, ScenarioConfig, ScenarioResult,
};
use thermostat_core::Result;

#[derive(Parser)]
#[command(
    name = "thermostat",
    version,
    about = "Thermostat scheduling and pricing under demand charges"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a fixed set-point schedule
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Comma-separated set-points, one per step
        #[arg(long, value_delimiter = ',', conflicts_with = "setpoint")]
        controls: Vec<f64>,
        /// Hold a single set-point for the whole horizon
        #[arg(long)]
        setpoint: Option<f64>,
    },
    /// Optimal schedule by dynamic programming
    OptimizeThermostat {
        #[command(flatten)]
        common: Common,
    },
    /// Constant and/or precooling schedules
    Baseline {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = BaselineKind::Both)]
        kind: BaselineKind,
    },
    /// Search for revenue-neutral prices minimizing production cost
    OptimizePrices {
        #[command(flatten)]
        common: Common,
    },
    /// Check the DP against exhaustive enumeration on random tiny instances
    Verify {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        max_candidates: usize,
        #[arg(long, default_value_t = 1e-9)]
        rel_tol: f64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    Constant,
    Precool,
    Both,
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML)
    #[arg(long, short)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output_dir`
    #[arg(long, short)]
    out: Option<PathBuf>,
    /// Override any config key, e.g. `--set p_d=13.616`
    #[arg(long = "set", value_name = "KEY=VALUE", value_parser = parse_kv)]
    set: Vec<(String, String)>,
    #[arg(long)]
    exterior_csv: Option<PathBuf>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    p_on: Option<f64>,
    #[arg(long)]
    p_off: Option<f64>,
    #[arg(long)]
    p_d: Option<f64>,
    #[arg(long)]
    grid_nodes: Option<usize>,
    #[arg(long)]
    du: Option<f64>,
    #[arg(long)]
    gamma_mode: Option<String>,
    #[arg(long)]
    b_max: Option<u32>,
}

fn parse_kv(s: &str) -> std::result::Result<(String, String), String> {
    let (k, v) = s
        .split_once('=')
        .ok_or_else(|| format!("expected KEY=VALUE, got {s:?}"))?;
    Ok((k.trim().to_string(), v.trim().to_string()))
}

impl Common {
    fn overrides(&self) -> Vec<(String, String)> {
        let mut out = self.set.clone();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                out.push((k.to_string(), v));
            }
        };
        push("days", self.days.map(|v| v.to_string()));
        push("p_on", self.p_on.map(|v| format!("{v:?}")));
        push("p_off", self.p_off.map(|v| format!("{v:?}")));
        push("p_d", self.p_d.map(|v| format!("{v:?}")));
        push("grid_nodes", self.grid_nodes.map(|v| v.to_string()));
        push("du", self.du.map(|v| format!("{v:?}")));
        push(
            "gamma_mode",
            self.gamma_mode.clone().map(|v| format!("{v:?}")),
        );
        push("b_max", self.b_max.map(|v| v.to_string()));
        out
    }

    fn scenario(&self) -> Result<Scenario> {
        let overrides = self.overrides();
        let mut cfg = match &self.config {
            Some(path) => ScenarioConfig::load(path, &overrides)?,
            None => ScenarioConfig::from_toml_with_overrides("", &overrides)?,
        };
        if let Some(p) = &self.exterior_csv {
            cfg.exterior_csv = Some(p.clone());
        }
        if let Some(o) = &self.out {
            cfg.output_dir = Some(o.clone());
        }
        Scenario::load(cfg)
    }
}

fn finish(scenario: &Scenario, results: &[ScenarioResult]) -> Result<()> {
    let out = scenario
        .config
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("out"));
    let written = emit_results(&scenario.config.name, results, Path::new(&out))?;
    print!("{}", render_report(&scenario.config.name, results));
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn verify(instances: usize, seed: u64, max_candidates: usize, rel_tol: f64) -> Result<bool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut passed, mut feasible) = (0, 0);
    for i in 0..instances {
        let inst = random_grid_aligned(&mut rng, max_candidates.min(MAX_CANDIDATES));
        let cert = certify(&inst, aligned_grid(), rel_tol)?;
        feasible += cert.feasible() as usize;
        if cert.passed() {
            passed += 1;
        } else {
            println!(
                "instance {i}: MISMATCH dp {} vs oracle {:?}; controls {:?} vs {:?}",
                cert.dp_value, cert.oracle_value, cert.dp_controls, cert.oracle_controls
            );
        }
    }
    println!("verify: {passed}/{instances} instances agree ({feasible} feasible), seed {seed}");
    Ok(passed == instances)
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Simulate {
            common,
            controls,
            setpoint,
        } => {
            let s = common.scenario()?;
            let controls = match setpoint {
                Some(u) => vec![u; s.problem.horizon()],
                None => controls,
            };
            let r = s.run_fixed("simulate", controls)?;
            finish(&s, &[r])?;
        }
        Command::OptimizeThermostat { common } => {
            let s = common.scenario()?;
            let r = s.run_optimal()?;
            finish(&s, &[r])?;
        }
        Command::Baseline { common, kind } => {
            let s = common.scenario()?;
            let mut results = Vec::new();
            if matches!(kind, BaselineKind::Constant | BaselineKind::Both) {
                results.push(s.run_constant()?);
            }
            if matches!(kind, BaselineKind::Precool | BaselineKind::Both) {
                results.push(s.run_precool()?);
            }
            finish(&s, &results)?;
        }
        Command::OptimizePrices { common } => {
            let s = common.scenario()?;
            let pricing = s.optimize_prices()?;
            let results = s.pricing_results(&pricing)?;
            finish(&s, &results)?;
        }
        Command::Verify {
            instances,
            seed,
            max_candidates,
            rel_tol,
        } => return verify(instances, seed, max_candidates, rel_tol),
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            let mut msg = format!("error: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                msg.push_str(&format!("\n  caused by: {s}"));
                src = s.source();
            }
            eprintln!("{msg}");
            ExitCode::FAILURE
        }
    }
}
