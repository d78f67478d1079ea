//! Command-line front end: argument parsing, configuration layering,
//! thread-pool setup and output routing.

pub mod commands;
pub mod config;
pub mod csv;
pub mod verify;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::scattering::PolarizationConvention;
use commands::{CliError, CommandOutput, Status};
use config::{parse_list, parse_triple, ConfigOverrides, RunConfig, ScanAxis};

pub const THREADS_ENV: &str = "ROTODEC_THREADS";

#[derive(Debug, Parser)]
#[command(name = "rotodec", version, about = "Rotational decoherence rates of anisotropic particles in thermal radiation")]
pub struct Cli {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct CommonArgs {
    /// Bath temperature in kelvin.
    #[arg(long = "temp-K", global = true, value_name = "K", allow_hyphen_values = true)]
    pub temp_k: Option<f64>,
    /// Polarizability volumes vx,vy,vz in m^3 (alpha = 4 pi eps0 v).
    #[arg(long = "alpha-vol-m3", global = true, value_name = "VX,VY,VZ", allow_hyphen_values = true)]
    pub alpha_vol_m3: Option<String>,
    /// Orientation difference in radians.
    #[arg(long = "omega-rad", global = true, allow_hyphen_values = true)]
    pub omega_rad: Option<f64>,
    /// Angular product-grid order.
    #[arg(long = "grid-order", global = true)]
    pub grid_order: Option<u32>,
    /// sum-sum, avg-sum, avg-avg or contracted.
    #[arg(long = "pol-convention", global = true)]
    pub pol_convention: Option<String>,
    /// Highest partial wave.
    #[arg(long = "lmax", global = true)]
    pub lmax: Option<u32>,
    /// Write CSV here instead of stdout.
    #[arg(long = "out", global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// key=value file; flags on the command line take precedence.
    #[arg(long = "config", global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form and numeric rate at one parameter point.
    Rate,
    /// Sweep temperature, orientation angle or anisotropy.
    Scan {
        /// temperature (log-spaced), omega or anisotropy (vx - vy).
        #[arg(long)]
        axis: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        stop: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
    },
    /// Partial-wave decomposition of the rate.
    Partialwave,
    /// Evolve rotational coherences between discrete orientations.
    Evolve {
        /// Orientation angles in radians.
        #[arg(long, allow_hyphen_values = true)]
        angles: Option<String>,
        /// Output times in seconds, ascending.
        #[arg(long)]
        times: Option<String>,
        /// Initial density matrix as `i,j,re,im` lines.
        #[arg(long)]
        rho0: Option<PathBuf>,
    },
    /// Run the self-check suite.
    Verify,
}

impl Cli {
    /// Flag values as an override layer.
    pub fn overrides(&self) -> Result<ConfigOverrides, CliError> {
        let c = &self.common;
        let mut o = ConfigOverrides {
            temperature_k: c.temp_k,
            alpha_vol_m3: c.alpha_vol_m3.as_deref().map(parse_triple).transpose()?,
            omega_rad: c.omega_rad,
            grid_order: c.grid_order,
            convention: c.pol_convention.as_deref().map(str::parse::<PolarizationConvention>).transpose()?,
            l_max: c.lmax,
            out: c.out.clone(),
            ..ConfigOverrides::default()
        };
        match &self.command {
            Command::Scan { axis, start, stop, steps } => {
                o.axis = axis.as_deref().map(str::parse::<ScanAxis>).transpose()?;
                o.start = *start;
                o.stop = *stop;
                o.steps = *steps;
            }
            Command::Evolve { angles, times, rho0 } => {
                o.angles = angles.as_deref().map(parse_list).transpose()?;
                o.times = times.as_deref().map(parse_list).transpose()?;
                o.rho0 = rho0.clone();
            }
            _ => {}
        }
        Ok(o)
    }

    pub fn resolve(&self) -> Result<RunConfig, CliError> {
        let file = match &self.common.config {
            Some(path) => ConfigOverrides::from_file(path)?,
            None => ConfigOverrides::default(),
        };
        Ok(RunConfig::resolve(file.overlay(self.overrides()?))?)
    }
}

pub fn execute(command: &Command, cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    match command {
        Command::Rate => commands::rate(cfg),
        Command::Scan { .. } => commands::scan(cfg),
        Command::Partialwave => commands::partialwave(cfg),
        Command::Evolve { .. } => commands::evolve(cfg),
        Command::Verify => verify::verify(cfg),
    }
}

/// Thread count from the environment; `0` or unset means rayon's default.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::invalid(format!("{THREADS_ENV} must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match run_inner(cli) {
        Ok(status) => status.code(),
        Err(e) => {
            eprintln!("rotodec: {e}");
            e.status.code()
        }
    }
}

fn run_inner(cli: Cli) -> Result<Status, CliError> {
    let threads = threads_from_env()?;
    let cfg = cli.resolve()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::invalid(format!("cannot start thread pool: {e}")))?;
    let output = pool.install(|| execute(&cli.command, &cfg))?;

    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    let write_err = |e: std::io::Error| CliError::invalid(format!("write failed: {e}"));
    match (&cfg.out, &output.report) {
        (Some(path), report) => {
            std::fs::write(path, &output.csv)
                .map_err(|e| CliError::invalid(format!("cannot write {}: {e}", path.display())))?;
            if let Some(r) = report {
                lock.write_all(r.as_bytes()).map_err(write_err)?;
            }
        }
        (None, Some(r)) => lock.write_all(r.as_bytes()).map_err(write_err)?,
        (None, None) => lock.write_all(output.csv.as_bytes()).map_err(write_err)?,
    }
    if let Some(w) = &output.warning {
        eprintln!("rotodec: {w}");
    }
    Ok(output.status)
}
