//! Subcommand implementations. Each returns the CSV text it produced.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;

use num_complex::Complex;

use super::config::{RunConfig, ScanAxis, DEFAULT_RATE_GRID_ORDER};
use super::csv::{num, CsvBuilder};
use crate::coherence::{evolve_coherences, CoherenceGrid};
use crate::error::Error;
use crate::partial_waves::{build_table, PartialWaveOptions};
use crate::planck::ThermalBath;
use crate::rates::{lambda_closed_form, lambda_numeric, relative_change, DecoherenceTime};
use crate::scattering::PolarizationConvention;
use crate::tensor::{polarizability_from_volume, PolarizabilityTensor};

/// Process exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    VerifyFailed,
    InvalidInput,
    NonConvergence,
}

impl Status {
    pub fn code(self) -> u8 {
        match self {
            Self::Ok => 0,
            Self::VerifyFailed => 1,
            Self::InvalidInput => 2,
            Self::NonConvergence => 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn invalid(message: impl Into<String>) -> Self {
        Self { status: Status::InvalidInput, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::NonConvergence { .. } => Status::NonConvergence,
            _ => Status::InvalidInput,
        };
        Self { status, message: e.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutput {
    pub csv: String,
    /// Human-readable text for stdout when the CSV goes to a file.
    pub report: Option<String>,
    pub status: Status,
    /// Set for non-fatal conditions worth a line on stderr.
    pub warning: Option<String>,
}

impl CommandOutput {
    fn data(csv: String, converged: bool, what: &str) -> Self {
        let (status, warning) = if converged {
            (Status::Ok, None)
        } else {
            (Status::NonConvergence, Some(format!("{what}: grid refinement check failed; raise --grid-order")))
        };
        Self { csv, report: None, status, warning }
    }
}

pub type CommandResult = Result<CommandOutput, CliError>;

fn setup(cfg: &RunConfig) -> Result<(ThermalBath<f64>, PolarizabilityTensor<f64>), CliError> {
    Ok((ThermalBath::new(cfg.temperature_k)?, polarizability_from_volume(cfg.alpha_vol_m3)?))
}

fn rate_convention(cfg: &RunConfig) -> PolarizationConvention {
    cfg.convention.unwrap_or_default()
}

struct RatePoint {
    closed: f64,
    numeric: f64,
    converged: bool,
}

fn rate_point(cfg: &RunConfig, temperature: f64, vol: [f64; 3], omega: f64) -> Result<RatePoint, CliError> {
    let bath = ThermalBath::new(temperature)?;
    let alpha = polarizability_from_volume(vol)?;
    let closed = lambda_closed_form(&bath, &alpha, omega)?.lambda;
    let order = cfg.grid_order.unwrap_or(DEFAULT_RATE_GRID_ORDER);
    let numeric = lambda_numeric(&bath, &alpha, omega, order, rate_convention(cfg))?;
    Ok(RatePoint { closed, numeric: numeric.lambda, converged: numeric.converged() })
}

pub fn rate(cfg: &RunConfig) -> CommandResult {
    setup(cfg)?;
    let p = rate_point(cfg, cfg.temperature_k, cfg.alpha_vol_m3, cfg.omega_rad)?;
    let tau = match DecoherenceTime::from_rate(p.closed) {
        DecoherenceTime::Finite(t) => num(t),
        DecoherenceTime::Infinite => "inf".to_owned(),
    };
    let mut out = CsvBuilder::new(&[
        "T_K",
        "alpha_vol_x_m3",
        "alpha_vol_y_m3",
        "alpha_vol_z_m3",
        "omega_rad",
        "grid_order",
        "pol_convention",
        "lambda_closed_per_s",
        "lambda_numeric_per_s",
        "rel_diff",
        "decoherence_time_s",
        "converged",
    ]);
    let [vx, vy, vz] = cfg.alpha_vol_m3;
    out.row(&[
        num(cfg.temperature_k),
        num(vx),
        num(vy),
        num(vz),
        num(cfg.omega_rad),
        cfg.grid_order.unwrap_or(DEFAULT_RATE_GRID_ORDER).to_string(),
        rate_convention(cfg).to_string(),
        num(p.closed),
        num(p.numeric),
        num(relative_change(p.closed, p.numeric)),
        tau,
        p.converged.to_string(),
    ]);
    Ok(CommandOutput::data(out.finish(), p.converged, "rate"))
}

fn sweep_values(axis: ScanAxis, cfg: &RunConfig) -> Result<Vec<f64>, CliError> {
    let (default_start, default_stop) = match axis {
        ScanAxis::Temperature => (30.0, 3000.0),
        ScanAxis::Omega => (0.0, PI),
        ScanAxis::Anisotropy => (0.0, 1.0e-25),
    };
    let start = cfg.start.unwrap_or(default_start);
    let stop = cfg.stop.unwrap_or(default_stop);
    if !(start.is_finite() && stop.is_finite()) {
        return Err(CliError::invalid("scan bounds must be finite"));
    }
    let n = cfg.steps;
    let t = |i: usize| i as f64 / (n - 1) as f64;
    Ok(match axis {
        ScanAxis::Temperature => {
            if !(start > 0.0 && stop > 0.0) {
                return Err(CliError::invalid("temperature scan bounds must be positive"));
            }
            let (a, b) = (start.ln(), stop.ln());
            (0..n).map(|i| (a + (b - a) * t(i)).exp()).collect()
        }
        ScanAxis::Omega | ScanAxis::Anisotropy => (0..n).map(|i| start + (stop - start) * t(i)).collect(),
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn scan(cfg: &RunConfig) -> CommandResult {
    setup(cfg)?;
    let axis = cfg.axis;
    let params = sweep_values(axis, cfg)?;
    let mut out = CsvBuilder::new(&[
        "param",
        "T_K",
        "omega_rad",
        "alpha_vol_x_m3",
        "alpha_vol_y_m3",
        "alpha_vol_z_m3",
        "lambda_closed_per_s",
        "lambda_numeric_per_s",
        "rel_diff",
    ]);
    let mut converged = true;
    let mut temps = Vec::new();
    let mut closed = Vec::new();
    let mut numeric = Vec::new();
    for &p in &params {
        let (mut temp, mut omega, mut vol) = (cfg.temperature_k, cfg.omega_rad, cfg.alpha_vol_m3);
        match axis {
            ScanAxis::Temperature => temp = p,
            ScanAxis::Omega => omega = p,
            // the parameter is alpha_x - alpha_y in volume units
            ScanAxis::Anisotropy => vol[0] = vol[1] + p,
        }
        let r = rate_point(cfg, temp, vol, omega)?;
        converged &= r.converged;
        out.row(&[
            num(p),
            num(temp),
            num(omega),
            num(vol[0]),
            num(vol[1]),
            num(vol[2]),
            num(r.closed),
            num(r.numeric),
            num(relative_change(r.closed, r.numeric)),
        ]);
        temps.push(temp);
        closed.push(r.closed);
        numeric.push(r.numeric);
    }
    out.comment("axis", axis.as_str());
    if axis == ScanAxis::Temperature {
        out.comment("loglog_slope", &num(loglog_slope(&temps, &numeric)));
        out.comment("loglog_slope_closed", &num(loglog_slope(&temps, &closed)));
    }
    Ok(CommandOutput::data(out.finish(), converged, "scan"))
}

pub fn partialwave(cfg: &RunConfig) -> CommandResult {
    let (bath, alpha) = setup(cfg)?;
    let options = PartialWaveOptions {
        grid_order: cfg.grid_order,
        convention: cfg.convention.unwrap_or(PolarizationConvention::DirectionContracted),
        ..PartialWaveOptions::default()
    };
    let table = build_table(cfg.l_max, &bath, &alpha, cfg.omega_rad, &options)?;
    let ratio = |v: f64| table.ratio(v).map_or_else(|| "nan".to_owned(), num);
    let mut out = CsvBuilder::new(&["kind", "l", "lp", "lambda_per_s", "ratio_to_closed", "converged"]);
    for e in &table.entries {
        out.row(&[
            "channel".to_owned(),
            e.l.to_string(),
            e.lp.to_string(),
            num(e.lambda),
            ratio(e.lambda),
            e.converged.to_string(),
        ]);
    }
    out.row(&[
        "total".to_owned(),
        String::new(),
        String::new(),
        num(table.total),
        ratio(table.total),
        table.converged.to_string(),
    ]);
    out.comment("grid_order", &table.grid_order.to_string());
    out.comment("pol_convention", table.convention.as_str());
    out.comment("lambda_closed_per_s", &table.closed_form.map_or_else(|| "nan".to_owned(), num));
    Ok(CommandOutput::data(out.finish(), table.converged, "partialwave"))
}

/// Reads `i,j,re,im` lines (0-based, `#` comments). A missing `(j, i)` is
/// filled with the conjugate of `(i, j)`; unlisted entries are zero.
pub fn read_rho0(path: &Path, n: usize) -> Result<Vec<Complex<f64>>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut m: Vec<Option<Complex<f64>>> = vec![None; n * n];
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || CliError::invalid(format!("{} line {}: expected i,j,re,im", path.display(), lineno + 1));
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 4 {
            return Err(bad());
        }
        let i: usize = f[0].parse().map_err(|_| bad())?;
        let j: usize = f[1].parse().map_err(|_| bad())?;
        let re: f64 = f[2].parse().map_err(|_| bad())?;
        let im: f64 = f[3].parse().map_err(|_| bad())?;
        if i >= n || j >= n {
            return Err(CliError::invalid(format!(
                "{} line {}: index out of range for {n} angles",
                path.display(),
                lineno + 1
            )));
        }
        m[i * n + j] = Some(Complex::new(re, im));
    }
    let mut out = vec![Complex::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = match (m[i * n + j], m[j * n + i]) {
                (Some(v), _) => v,
                (None, Some(v)) => v.conj(),
                (None, None) => Complex::new(0.0, 0.0),
            };
        }
    }
    Ok(out)
}

pub fn evolve(cfg: &RunConfig) -> CommandResult {
    let (bath, alpha) = setup(cfg)?;
    let times = &cfg.times;
    if times.is_empty() {
        return Err(CliError::invalid("--times needs at least one value"));
    }
    if times.iter().any(|t| !(t.is_finite() && *t >= 0.0)) || times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(CliError::invalid("--times must be finite, non-negative and strictly ascending"));
    }
    let angles = cfg.angles.clone();
    let rho0 = match &cfg.rho0 {
        Some(path) => {
            let m = read_rho0(path, angles.len())?;
            CoherenceGrid::new(angles, m)?
        }
        None => CoherenceGrid::equal_superposition(angles)?,
    };
    let mut out = CsvBuilder::new(&["t_s", "i", "j", "alpha_i_rad", "alpha_j_rad", "abs_rho", "arg_rho_rad"]);
    let n = rho0.len();
    for &t in times {
        let rho = evolve_coherences(&rho0, &bath, &alpha, t)?;
        for i in 0..n {
            for j in i..n {
                let v = rho.get(i, j);
                out.row(&[
                    num(t),
                    i.to_string(),
                    j.to_string(),
                    num(rho.angles()[i]),
                    num(rho.angles()[j]),
                    num(v.norm()),
                    num(v.arg()),
                ]);
            }
        }
    }
    Ok(CommandOutput::data(out.finish(), true, "evolve"))
}
