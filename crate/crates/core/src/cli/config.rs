//! Run configuration: optional `key=value` file overlaid by command-line flags.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::scattering::PolarizationConvention;

pub const DEFAULT_TEMPERATURE_K: f64 = 300.0;
pub const DEFAULT_ALPHA_VOL_M3: [f64; 3] = [1.0e-25, 0.5e-25, 0.5e-25];
pub const DEFAULT_OMEGA_RAD: f64 = FRAC_PI_2;
pub const DEFAULT_RATE_GRID_ORDER: u32 = 8;
pub const DEFAULT_LMAX: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScanAxis {
    Temperature,
    Omega,
    Anisotropy,
}

impl ScanAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Temperature => "temperature",
            Self::Omega => "omega",
            Self::Anisotropy => "anisotropy",
        }
    }
}

impl fmt::Display for ScanAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScanAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "temperature" | "t" => Ok(Self::Temperature),
            "omega" | "angle" => Ok(Self::Omega),
            "anisotropy" => Ok(Self::Anisotropy),
            other => Err(Error::invalid(format!(
                "unknown scan axis '{other}' (expected temperature, omega or anisotropy)"
            ))),
        }
    }
}

/// Every configurable value, unset fields falling through to the next layer.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigOverrides {
    pub temperature_k: Option<f64>,
    pub alpha_vol_m3: Option<[f64; 3]>,
    pub omega_rad: Option<f64>,
    pub grid_order: Option<u32>,
    pub convention: Option<PolarizationConvention>,
    pub l_max: Option<u32>,
    pub out: Option<PathBuf>,
    pub axis: Option<ScanAxis>,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: Option<usize>,
    pub angles: Option<Vec<f64>>,
    pub times: Option<Vec<f64>>,
    pub rho0: Option<PathBuf>,
}

impl ConfigOverrides {
    /// Fields set in `top` win.
    pub fn overlay(self, top: ConfigOverrides) -> ConfigOverrides {
        ConfigOverrides {
            temperature_k: top.temperature_k.or(self.temperature_k),
            alpha_vol_m3: top.alpha_vol_m3.or(self.alpha_vol_m3),
            omega_rad: top.omega_rad.or(self.omega_rad),
            grid_order: top.grid_order.or(self.grid_order),
            convention: top.convention.or(self.convention),
            l_max: top.l_max.or(self.l_max),
            out: top.out.or(self.out),
            axis: top.axis.or(self.axis),
            start: top.start.or(self.start),
            stop: top.stop.or(self.stop),
            steps: top.steps.or(self.steps),
            angles: top.angles.or(self.angles),
            times: top.times.or(self.times),
            rho0: top.rho0.or(self.rho0),
        }
    }

    /// Parses `key=value` lines; `#` starts a comment. Keys are the long flag
    /// names without dashes prefix, `_` and `-` interchangeable.
    pub fn parse_file_contents(text: &str) -> Result<Self> {
        let mut cfg = ConfigOverrides::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("config line {}: expected key=value", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::invalid(format!("config line {}: {e}", lineno + 1)))?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::invalid(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse_file_contents(&text)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key.to_ascii_lowercase().replace('_', "-").as_str() {
            "temp-k" => self.temperature_k = Some(parse_f64(value)?),
            "alpha-vol-m3" => self.alpha_vol_m3 = Some(parse_triple(value)?),
            "omega-rad" => self.omega_rad = Some(parse_f64(value)?),
            "grid-order" => self.grid_order = Some(parse_int(value)?),
            "pol-convention" => self.convention = Some(value.parse()?),
            "lmax" => self.l_max = Some(parse_int(value)?),
            "out" => self.out = Some(PathBuf::from(value)),
            "axis" => self.axis = Some(value.parse()?),
            "start" => self.start = Some(parse_f64(value)?),
            "stop" => self.stop = Some(parse_f64(value)?),
            "steps" => self.steps = Some(parse_int(value)?),
            "angles" => self.angles = Some(parse_list(value)?),
            "times" => self.times = Some(parse_list(value)?),
            "rho0" => self.rho0 = Some(PathBuf::from(value)),
            other => return Err(Error::invalid(format!("unknown key '{other}'"))),
        }
        Ok(())
    }
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse::<f64>().map_err(|_| Error::invalid(format!("'{s}' is not a number")))
}

fn parse_int<I: FromStr>(s: &str) -> Result<I> {
    s.trim().parse::<I>().map_err(|_| Error::invalid(format!("'{s}' is not a non-negative integer")))
}

pub fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',').map(parse_f64).collect()
}

pub fn parse_triple(s: &str) -> Result<[f64; 3]> {
    let v = parse_list(s)?;
    <[f64; 3]>::try_from(v.as_slice())
        .map_err(|_| Error::invalid(format!("expected three comma-separated values, got '{s}'")))
}

/// Fully resolved settings shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub temperature_k: f64,
    pub alpha_vol_m3: [f64; 3],
    pub omega_rad: f64,
    /// `None` lets each command pick its own default order.
    pub grid_order: Option<u32>,
    pub convention: Option<PolarizationConvention>,
    pub l_max: u32,
    pub out: Option<PathBuf>,
    pub axis: ScanAxis,
    pub start: Option<f64>,
    pub stop: Option<f64>,
    pub steps: usize,
    pub angles: Vec<f64>,
    pub times: Vec<f64>,
    pub rho0: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self::resolve(ConfigOverrides::default()).expect("defaults are valid")
    }
}

impl RunConfig {
    pub fn resolve(o: ConfigOverrides) -> Result<Self> {
        let cfg = RunConfig {
            temperature_k: o.temperature_k.unwrap_or(DEFAULT_TEMPERATURE_K),
            alpha_vol_m3: o.alpha_vol_m3.unwrap_or(DEFAULT_ALPHA_VOL_M3),
            omega_rad: o.omega_rad.unwrap_or(DEFAULT_OMEGA_RAD),
            grid_order: o.grid_order,
            convention: o.convention,
            l_max: o.l_max.unwrap_or(DEFAULT_LMAX),
            out: o.out,
            axis: o.axis.unwrap_or(ScanAxis::Temperature),
            start: o.start,
            stop: o.stop,
            steps: o.steps.unwrap_or(10),
            angles: o.angles.unwrap_or_else(|| vec![0.0, FRAC_PI_2]),
            times: o.times.unwrap_or_else(|| vec![0.0, 10.0, 20.0, 40.0, 80.0]),
            rho0: o.rho0,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<()> {
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(Error::invalid("temperature must be positive"));
        }
        if self.alpha_vol_m3.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::invalid("polarizability volumes must be non-negative"));
        }
        if !self.omega_rad.is_finite() {
            return Err(Error::invalid("omega must be finite"));
        }
        if self.steps < 2 {
            return Err(Error::invalid("sweeps need at least 2 steps"));
        }
        Ok(())
    }
}
