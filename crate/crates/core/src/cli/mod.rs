//! The `contactdyn` command-line tool.
//!
//! Exit codes: 0 all checks pass, 1 a check failed, 2 usage or config
//! error, 3 numeric failure (singular Lagrangian, blow-up).

pub mod commands;
pub mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use commands::{check, derive, simulate, CommandError, Derived, RunReport, Settings, Suite};
pub use config::{load_config, ConfigError, Loaded, Model, SystemConfig};

use crate::sampling::SampleBox;

/// Shipped example systems as `(name, json)`.
pub const CATALOG: &[(&str, &str)] = &[
    ("damped_oscillator", include_str!("../../catalog/damped_oscillator.json")),
    ("gravity_friction", include_str!("../../catalog/gravity_friction.json")),
    ("parachute", include_str!("../../catalog/parachute.json")),
];

pub const SCHEMA: &str = include_str!("../../catalog/schema.json");

pub fn catalog_config(name: &str) -> Option<SystemConfig> {
    CATALOG
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| SystemConfig::from_json(text).expect("catalog configs parse"))
}

pub mod exit {
    pub const PASS: u8 = 0;
    pub const CHECK_FAILED: u8 = 1;
    pub const USAGE: u8 = 2;
    pub const NUMERIC: u8 = 3;
}

#[derive(Debug, Parser)]
#[command(name = "contactdyn", version, about = "Contact Hamiltonian and Lagrangian dynamics: derive, simulate, check")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the vector field, Reeb field, energy and contact form; write derived.json.
    Derive(Common),
    /// Integrate from the initial state and write <name>.csv.
    Simulate(Common),
    /// Run residual suites on the sample box and along a trajectory.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
    },
    /// List the shipped example configs, or print one (or the schema).
    Catalog {
        /// Config name, or `schema`.
        name: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct Common {
    /// System definition (JSON), or `catalog:<name>` for a shipped example.
    pub config: String,
    /// Sampling seed [default: 20200101].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Uniform sample box bounds for every coordinate, as `lo,hi` [default: -2,2].
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub sample_box: Option<(f64, f64)>,
    /// Pointwise residual tolerance, applied after scaling [default: 1e-9].
    #[arg(long)]
    pub tol: Option<f64>,
    /// Number of sample points [default: 200].
    #[arg(long)]
    pub points: Option<usize>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

fn parse_box(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let lo: f64 = a.trim().parse().map_err(|e| format!("lo: {e}"))?;
    let hi: f64 = b.trim().parse().map_err(|e| format!("hi: {e}"))?;
    if !(lo <= hi) {
        return Err("need lo <= hi".into());
    }
    Ok((lo, hi))
}

fn load(common: &Common) -> Result<(Loaded, Settings), ConfigError> {
    let loaded = match common.config.strip_prefix("catalog:") {
        Some(name) => catalog_config(name)
            .ok_or_else(|| ConfigError::Invalid {
                pointer: "/".into(),
                message: format!("no catalog entry `{name}`"),
            })?
            .build()?,
        None => load_config(common.config.as_ref())?,
    };
    let mut settings = Settings::for_config(&loaded);
    if let Some((lo, hi)) = common.sample_box {
        settings.sample_box = SampleBox::uniform(loaded.config.dim(), lo, hi);
    }
    if let Some(s) = common.seed {
        settings.seed = s;
    }
    if let Some(t) = common.tol {
        settings.tol = t;
    }
    if let Some(p) = common.points {
        settings.points = p;
    }
    settings.out = common.out.clone();
    Ok((loaded, settings))
}

fn command_error(e: CommandError) -> u8 {
    eprintln!("error: {e}");
    match e {
        CommandError::Numeric(_) => exit::NUMERIC,
        CommandError::Usage(_) | CommandError::Io { .. } => exit::USAGE,
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    let (common, action) = match &cli.command {
        Command::Catalog { name } => return catalog(name.as_deref()),
        Command::Derive(c) => (c, None),
        Command::Simulate(c) => (c, Some(None)),
        Command::Check { common, suite } => (common, Some(Some(*suite))),
    };
    let (loaded, settings) = match load(common) {
        Ok(x) => x,
        Err(e) => {
            eprintln!("error: {e}");
            return match e {
                ConfigError::Singular { .. } => exit::NUMERIC,
                _ => exit::USAGE,
            };
        }
    };
    let result = match action {
        None => derive(&loaded, &settings),
        Some(None) => simulate(&loaded, &settings),
        Some(Some(suite)) => {
            let mut report = check(&loaded, suite, &settings);
            match commands::write_report(&report, &settings) {
                Ok(p) => report.files.push(p),
                Err(e) => return command_error(e),
            }
            Ok(report)
        }
    };
    match result {
        Ok(report) => {
            print!("{}", report.render());
            if report.passed() {
                exit::PASS
            } else {
                exit::CHECK_FAILED
            }
        }
        Err(e) => command_error(e),
    }
}

fn catalog(name: Option<&str>) -> u8 {
    match name {
        None => {
            for (n, _) in CATALOG {
                println!("{n}");
            }
            exit::PASS
        }
        Some("schema") => {
            print!("{SCHEMA}");
            exit::PASS
        }
        Some(n) => match CATALOG.iter().find(|(k, _)| *k == n) {
            Some((_, text)) => {
                print!("{text}");
                exit::PASS
            }
            None => {
                eprintln!("error: no catalog entry `{n}`");
                exit::USAGE
            }
        },
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { exit::USAGE } else { exit::PASS });
        }
    };
    ExitCode::from(run(cli))
}
