mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use masonry_core::config::RunSettings;
use masonry_core::Error;

#[derive(Parser, Debug)]
#[command(name = "masonry", version, about = "Robotic arch construction: calibration, sequencing and support optimisation")]
pub struct Cli {
    /// TOML run settings (gravity, [arch], [joint], vault_table).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for candidate and calibration solves.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Joint normal stiffness, kN/m³.
    #[arg(long, global = true)]
    joint_linear: Option<f64>,
    /// Joint rotational stiffness, kN·m/rad/m².
    #[arg(long, global = true)]
    joint_rot: Option<f64>,
    /// Rigid link stiffness as a multiple of the joint stiffness.
    #[arg(long, global = true)]
    rigid_factor: Option<f64>,
    /// Number of bricks in the arch.
    #[arg(long, global = true)]
    bricks: Option<usize>,
    /// Progress on stderr; repeat for more.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Vault stiffness tests against measured values.
    Calibrate {
        /// Also scan a log grid of joint stiffnesses: N points per decade axis.
        #[arg(long, value_name = "N")]
        grid: Option<usize>,
    },
    /// Step-by-step analysis of a two-robot plan.
    Simulate {
        #[arg(long, value_enum, default_value_t = TwoRobot::Sequential)]
        method: TwoRobot,
    },
    /// Build a plan with optimised support positions.
    Optimize {
        #[arg(long, value_enum, default_value_t = Optimised::Full3)]
        method: Optimised,
    },
    /// Sequential, cantilever and optimised three-robot plans side by side.
    Compare,
    /// Candidate analyses needed for the optimised plan.
    Budget,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum TwoRobot {
    Sequential,
    Cantilever,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Optimised {
    Modified,
    Full3,
}

/// Everything a subcommand needs, resolved and checked before any solve.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub settings: RunSettings,
    pub out: PathBuf,
    pub verbosity: u8,
}

impl RunConfig {
    pub fn resolve(cli: Cli) -> Result<Self, Error> {
        let mut settings = match &cli.config {
            Some(path) => RunSettings::load(path)?,
            None => RunSettings::default(),
        };
        if let Some(k) = cli.joint_linear {
            settings.joint.k_linear = k;
        }
        if let Some(k) = cli.joint_rot {
            settings.joint.k_rotational = k;
        }
        if let Some(f) = cli.rigid_factor {
            settings.joint.rigid_factor = f;
        }
        if let Some(n) = cli.bricks {
            settings.arch.n_bricks = n;
        }
        if cli.jobs == Some(0) {
            return Err(Error::Config("--jobs must be at least 1".into()));
        }
        settings.validate()?;
        if let Some(jobs) = cli.jobs {
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build_global()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
        }
        Ok(RunConfig {
            command: cli.command,
            settings,
            out: cli.out,
            verbosity: cli.verbose,
        })
    }

    pub fn log(&self, level: u8, msg: impl AsRef<str>) {
        if self.verbosity >= level {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn fail(kind: &str, message: String) -> ExitCode {
    let body = json!({ "error": { "kind": kind, "message": message } });
    eprintln!("{body}");
    ExitCode::from(if kind == "usage" { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            return fail("usage", e.render().to_string().trim_end().to_string());
        }
    };
    let run = match RunConfig::resolve(cli) {
        Ok(r) => r,
        Err(e) => return fail(e.kind(), e.to_string()),
    };
    match commands::run(&run) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
