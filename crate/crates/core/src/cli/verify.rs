//! Self-check suite behind `rotodec verify`. All randomness comes from a
//! fixed-seed ChaCha stream so reports are reproducible byte for byte.

use std::f64::consts::{FRAC_PI_2, LN_2, PI};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::commands::{loglog_slope, CliError, CommandOutput, Status};
use super::config::{RunConfig, DEFAULT_RATE_GRID_ORDER};
use super::csv::CsvBuilder;
use crate::coherence::{evolve_coherences, CoherenceGrid};
use crate::error::Result;
use crate::geometry::{rotate_direction_z, UnitDirection};
use crate::partial_waves::{build_table, i11_closed, i_llprime, min_grid_order, PartialWaveOptions};
use crate::planck::ThermalBath;
use crate::quadrature::{build_sphere_grid, integrate_product, integrate_s2};
use crate::rates::{angular_delta_integral, lambda_closed_form, lambda_numeric, relative_change};
use crate::scattering::{delta_kernel, PolarizationConvention};
use crate::special::{addition_theorem_lhs, legendre_p, riemann_zeta_int, spherical_harmonic, SphericalHarmonicIndex};
use crate::tensor::{polarizability_from_volume, PolarizabilityTensor};

pub const VERIFY_SEED: u64 = 0x0072_6f74_6f64_6563;
const PW_LMAX: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn within(name: &'static str, residual: f64, tolerance: f64, detail: String) -> Self {
        // NaN residuals fail
        Self { name, residual, tolerance, pass: residual <= tolerance, detail }
    }

    fn error(name: &'static str, tolerance: f64, e: impl std::fmt::Display) -> Self {
        Self { name, residual: f64::NAN, tolerance, pass: false, detail: format!("error: {e}") }
    }

    pub fn line(&self) -> String {
        let status = if self.pass { "PASS" } else { "FAIL" };
        let mut s = format!("{status} {:<28} residual={:.3e} tol={:.1e}", self.name, self.residual, self.tolerance);
        if !self.detail.is_empty() {
            s.push_str("  ");
            s.push_str(&self.detail);
        }
        s
    }
}

fn run(name: &'static str, tol: f64, f: impl FnOnce() -> Result<(f64, String)>) -> CheckOutcome {
    match f() {
        Ok((residual, detail)) => CheckOutcome::within(name, residual, tol, detail),
        Err(e) => CheckOutcome::error(name, tol, e),
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (lo.ln() + (hi.ln() - lo.ln()) * rng.gen::<f64>()).exp()
}

fn random_volumes(rng: &mut ChaCha8Rng) -> [f64; 3] {
    [log_uniform(rng, 1e-27, 1e-24), log_uniform(rng, 1e-27, 1e-24), log_uniform(rng, 1e-27, 1e-24)]
}

fn random_direction(rng: &mut ChaCha8Rng) -> UnitDirection<f64> {
    let z: f64 = rng.gen_range(-1.0..1.0);
    UnitDirection::new(z.acos(), rng.gen_range(0.0..2.0 * PI)).expect("valid angles")
}

fn canonical(cfg: &RunConfig) -> Result<(ThermalBath<f64>, PolarizabilityTensor<f64>)> {
    Ok((ThermalBath::new(cfg.temperature_k)?, polarizability_from_volume(cfg.alpha_vol_m3)?))
}

fn check_closed_vs_numeric(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let order = cfg.grid_order.unwrap_or(DEFAULT_RATE_GRID_ORDER);
    let conv = cfg.convention.unwrap_or_default();
    let draws: Vec<(f64, [f64; 3], f64)> = (0..20)
        .map(|_| (log_uniform(rng, 3.0, 3000.0), random_volumes(rng), rng.gen_range(1e-3..PI - 1e-3)))
        .collect();
    run("closed_vs_numeric_rate", 1e-9, || {
        let mut worst = 0.0f64;
        let mut ratio_sum = 0.0;
        let mut unconverged = 0;
        for (t, vol, omega) in &draws {
            let bath = ThermalBath::new(*t)?;
            let alpha = polarizability_from_volume(*vol)?;
            let closed = lambda_closed_form(&bath, &alpha, *omega)?.lambda;
            let numeric = lambda_numeric(&bath, &alpha, *omega, order, conv)?;
            if !numeric.converged() {
                unconverged += 1;
            }
            worst = worst.max(relative_change(closed, numeric.lambda));
            ratio_sum += numeric.lambda / closed;
        }
        let mut detail = format!("draws=20 L={order} convention={conv} mean_ratio={:.6}", ratio_sum / 20.0);
        if unconverged > 0 {
            detail.push_str(&format!(" unconverged={unconverged}"));
            worst = worst.max(f64::INFINITY);
        }
        Ok((worst, detail))
    })
}

fn check_partial_waves(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let options = PartialWaveOptions {
        grid_order: cfg.grid_order,
        convention: PolarizationConvention::DirectionContracted,
        ..PartialWaveOptions::default()
    };
    let table = canonical(cfg).and_then(|(bath, alpha)| build_table(PW_LMAX, &bath, &alpha, cfg.omega_rad, &options));
    let table = match table {
        Ok(t) => t,
        Err(e) => {
            return vec![
                CheckOutcome::error("partial_wave_selection", 1e-8, &e),
                CheckOutcome::error("partial_wave_l00", 1e-12, &e),
                CheckOutcome::error("partial_wave_l11_closed", 1e-8, &e),
            ]
        }
    };
    let l11 = table.entry(1, 1).expect("l_max >= 1").lambda;
    let others = table
        .entries
        .iter()
        .filter(|e| (e.l, e.lp) != (1, 1))
        .map(|e| e.lambda.abs())
        .fold(0.0f64, f64::max);
    let unconverged = if table.converged { String::new() } else { " unconverged".to_owned() };
    let penalty = if table.converged { 0.0 } else { f64::INFINITY };
    let l00 = table.entry(0, 0).expect("l_max >= 0").lambda.abs();
    let closed = table.closed_form.unwrap_or(f64::NAN);
    vec![
        CheckOutcome::within(
            "partial_wave_selection",
            (others / l11).max(penalty),
            1e-8,
            format!("max |L_ll'|/L_11 off (1,1), lmax={PW_LMAX} L={}{unconverged}", table.grid_order),
        ),
        CheckOutcome::within("partial_wave_l00", (l00 / l11).max(penalty), 1e-12, "L_00/L_11".to_owned()),
        CheckOutcome::within(
            "partial_wave_l11_closed",
            relative_change(l11, closed).max(penalty),
            1e-8,
            format!("L_11={l11:.12e} closed={closed:.12e}"),
        ),
    ]
}

fn check_i11(cfg: &RunConfig, rng: &mut ChaCha8Rng) -> CheckOutcome {
    let order = cfg.grid_order.unwrap_or(min_grid_order(1));
    let omegas = [0.0, PI / 6.0, PI / 4.0, PI / 3.0, FRAC_PI_2];
    let tensors: Vec<[f64; 3]> = (0..5).map(|_| random_volumes(rng)).collect();
    run("i11_closed_form", 1e-8, || {
        let bath = ThermalBath::new(cfg.temperature_k)?;
        let k = bath.thermal_wavenumber();
        let mut worst = 0.0f64;
        for vol in &tensors {
            let alpha = polarizability_from_volume(*vol)?;
            for &w in &omegas {
                let num = i_llprime(1, 1, w, k, &alpha, order, PolarizationConvention::DirectionContracted)?;
                let exact = i11_closed(w, k, &alpha)?;
                worst = worst.max(relative_change(num.value, exact));
                if !num.converged {
                    worst = f64::INFINITY;
                }
            }
        }
        Ok((worst, format!("5 angles x 5 tensors, L={order}")))
    })
}

fn check_t7(cfg: &RunConfig) -> CheckOutcome {
    let order = cfg.grid_order.unwrap_or(DEFAULT_RATE_GRID_ORDER);
    let conv = cfg.convention.unwrap_or_default();
    run("temperature_power_law", 1e-6, || {
        let (_, alpha) = canonical(cfg)?;
        let t0 = cfg.temperature_k;
        let temps: Vec<f64> = (0..11).map(|i| t0 * 10f64.powf(i as f64 / 10.0)).collect();
        let mut rates = Vec::with_capacity(temps.len());
        for &t in &temps {
            rates.push(lambda_numeric(&ThermalBath::new(t)?, &alpha, cfg.omega_rad, order, conv)?.lambda);
        }
        let slope = loglog_slope(&temps, &rates);
        Ok(((slope - 7.0).abs(), format!("slope={slope:.12} over [T, 10T]")))
    })
}

fn check_angle_laws(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let order = cfg.grid_order.unwrap_or(DEFAULT_RATE_GRID_ORDER);
    let conv = cfg.convention.unwrap_or_default();
    let omegas: Vec<f64> = (0..8).map(|i| 0.1 + 0.2 * i as f64).collect();
    let numeric = |w: f64| -> Result<f64> {
        let (bath, alpha) = canonical(cfg)?;
        Ok(lambda_numeric(&bath, &alpha, w, order, conv)?.lambda)
    };
    let sin2 = run("sin_squared_law", 1e-10, || {
        let ratios = omegas.iter().map(|&w| Ok(numeric(w)? / w.sin().powi(2))).collect::<Result<Vec<_>>>()?;
        let mean = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let worst = ratios.iter().map(|r| (r / mean - 1.0).abs()).fold(0.0, f64::max);
        Ok((worst, "Lambda/sin^2 spread, w = 0.1..1.5".to_owned()))
    });
    let mirror = run("supplementary_symmetry", 1e-12, || {
        let mut worst = 0.0f64;
        for &w in &omegas {
            worst = worst.max(relative_change(numeric(w)?, numeric(PI - w)?));
        }
        Ok((worst, "Lambda(w) vs Lambda(pi - w)".to_owned()))
    });
    vec![sin2, mirror]
}

fn check_moments() -> Vec<CheckOutcome> {
    let moments = run("photon_moments", 1e-10, || {
        let mut worst = 0.0f64;
        for t in [3.0, 77.0, 300.0, 3000.0] {
            let bath = ThermalBath::new(t)?;
            for n in 2..=8 {
                let exact = bath.photon_moment_closed(n)?;
                worst = worst.max(relative_change(bath.photon_moment_numeric(n, 1e-12)?, exact));
            }
        }
        Ok((worst, "n = 2..8, T in {3, 77, 300, 3000} K".to_owned()))
    });
    let zeta = run("zeta7_value", 5e-6, || {
        let z = riemann_zeta_int::<f64>(7)?;
        Ok(((z - 1.00835).abs(), format!("zeta(7)={z:.15}")))
    });
    vec![moments, zeta]
}

fn check_harmonics(rng: &mut ChaCha8Rng) -> Vec<CheckOutcome> {
    let pairs: Vec<(u32, UnitDirection<f64>, UnitDirection<f64>)> =
        (0..100).map(|i| (i % 7, random_direction(rng), random_direction(rng))).collect();
    let rotations: Vec<(SphericalHarmonicIndex, UnitDirection<f64>, f64)> = (0..100)
        .map(|_| {
            let l = rng.gen_range(0..=6u32);
            let m = rng.gen_range(-(l as i32)..=l as i32);
            let idx = SphericalHarmonicIndex::new(l, m).expect("valid index");
            (idx, random_direction(rng), rng.gen_range(-PI..PI))
        })
        .collect();

    let ortho = run("harmonic_orthonormality", 1e-12, || {
        let grid = build_sphere_grid::<f64>(12)?;
        let idx: Vec<SphericalHarmonicIndex> = SphericalHarmonicIndex::all_up_to(6).collect();
        let table: Vec<Vec<Complex<f64>>> = grid
            .nodes()
            .iter()
            .map(|n| idx.iter().map(|i| spherical_harmonic(*i, &n.direction)).collect())
            .collect();
        let mut worst = 0.0f64;
        for a in 0..idx.len() {
            for b in 0..idx.len() {
                let mut s = Complex::new(0.0, 0.0);
                for (n, row) in grid.nodes().iter().zip(&table) {
                    s += row[a] * row[b].conj() * n.weight;
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((s - target).norm());
            }
        }
        Ok((worst, "l <= 6 on an order-12 grid".to_owned()))
    });
    let addition = run("addition_theorem", 1e-12, || {
        let mut worst = 0.0f64;
        for (l, d1, d2) in &pairs {
            let cos = d1.to_cartesian().dot(&d2.to_cartesian()).clamp(-1.0, 1.0);
            let rhs = (2 * l + 1) as f64 / (4.0 * PI) * legendre_p(*l, cos)?;
            worst = worst.max((addition_theorem_lhs(*l, d1, d2) - rhs).abs());
        }
        Ok((worst, "100 random pairs, l <= 6".to_owned()))
    });
    let rotation = run("rotation_covariance", 1e-12, || {
        let mut worst = 0.0f64;
        for (idx, d, a) in &rotations {
            let lhs = spherical_harmonic(*idx, &rotate_direction_z(d, *a));
            let rhs = spherical_harmonic(*idx, d) * Complex::from_polar(1.0, -(idx.m() as f64) * a);
            worst = worst.max((lhs - rhs).norm());
        }
        Ok((worst, "Y_lm(R_z d) = e^{-im a} Y_lm(d), 100 samples".to_owned()))
    });
    vec![ortho, addition, rotation]
}

fn check_evolution(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let angles = vec![0.0, 0.4, FRAC_PI_2, 2.5];
    let setup = || -> Result<_> {
        let (bath, alpha) = canonical(cfg)?;
        let rho0 = CoherenceGrid::equal_superposition(angles.clone())?;
        Ok((bath, alpha, rho0))
    };
    let max_diff = |a: &CoherenceGrid<f64>, b: &CoherenceGrid<f64>| {
        a.matrix().iter().zip(b.matrix()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    };
    let semigroup = run("evolution_semigroup", 1e-15, || {
        let (bath, alpha, rho0) = setup()?;
        let (t1, t2) = (7.0, 19.5);
        let direct = evolve_coherences(&rho0, &bath, &alpha, t1 + t2)?;
        let stepped = evolve_coherences(&evolve_coherences(&rho0, &bath, &alpha, t1)?, &bath, &alpha, t2)?;
        Ok((max_diff(&direct, &stepped), "rho(t1+t2) vs rho(t2) after rho(t1)".to_owned()))
    });
    let diagonal = run("evolution_populations", 0.0, || {
        let (bath, alpha, rho0) = setup()?;
        let rho = evolve_coherences(&rho0, &bath, &alpha, 1e3)?;
        let worst = (0..rho.len()).map(|i| (rho.get(i, i) - rho0.get(i, i)).norm()).fold(0.0, f64::max);
        Ok((worst, "diagonal entries unchanged".to_owned()))
    });
    let half_life = run("coherence_half_life", 1e-12, || {
        let (bath, alpha, rho0) = setup()?;
        let lambda = lambda_closed_form(&bath, &alpha, angles[2] - angles[0])?.lambda;
        let rho = evolve_coherences(&rho0, &bath, &alpha, LN_2 / lambda)?;
        let ratio = rho.get(0, 2).norm() / rho0.get(0, 2).norm();
        Ok(((ratio - 0.5).abs(), "|rho_02| at t = ln 2 / Lambda".to_owned()))
    });
    vec![semigroup, diagonal, half_life]
}

fn check_thread_determinism(cfg: &RunConfig) -> CheckOutcome {
    run("thread_determinism", 0.0, || {
        let (_, alpha) = canonical(cfg)?;
        let grid = build_sphere_grid::<f64>(10)?;
        let eval = |threads: usize| -> Result<(f64, f64)> {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::Error::invalid(e.to_string()))?;
            pool.install(|| {
                let rate = angular_delta_integral(&alpha, cfg.omega_rad, 10, PolarizationConvention::AvgAvg)?;
                let four = integrate_product(&[&grid, &grid, &grid], |n| {
                    delta_kernel(&n[0].direction, &n[1].direction, &alpha, 0.3, PolarizationConvention::AvgAvg)
                        * n[2].cartesian.z().powi(2)
                })?;
                Ok((rate, four))
            })
        };
        let reference = eval(1)?;
        let mut mismatches = 0;
        for threads in [2, 4, 8] {
            let r = eval(threads)?;
            if r.0.to_bits() != reference.0.to_bits() || r.1.to_bits() != reference.1.to_bits() {
                mismatches += 1;
            }
        }
        Ok((mismatches as f64, "bitwise comparison at 1, 2, 4, 8 threads".to_owned()))
    })
}

/// Sanity check that the quadrature integrates a band-limited integrand exactly.
fn check_grid_exactness() -> CheckOutcome {
    run("grid_exactness", 1e-13, || {
        let grid = build_sphere_grid::<f64>(8)?;
        // integral of z^8 over S^2 is 4 pi / 9
        let v: f64 = integrate_s2(&grid, |n| n.cartesian.z().powi(8));
        Ok(((v / (4.0 * PI / 9.0) - 1.0).abs(), "z^8 on an order-8 grid".to_owned()))
    })
}

pub fn run_checks(cfg: &RunConfig) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(VERIFY_SEED);
    let mut out = vec![check_closed_vs_numeric(cfg, &mut rng)];
    out.extend(check_partial_waves(cfg));
    out.push(check_i11(cfg, &mut rng));
    out.push(check_t7(cfg));
    out.extend(check_angle_laws(cfg));
    out.extend(check_moments());
    out.extend(check_harmonics(&mut rng));
    out.extend(check_evolution(cfg));
    out.push(check_thread_determinism(cfg));
    out.push(check_grid_exactness());
    out
}

pub fn verify(cfg: &RunConfig) -> Result<CommandOutput, CliError> {
    let checks = run_checks(cfg);
    let passed = checks.iter().filter(|c| c.pass).count();
    let mut report = String::new();
    let mut csv = CsvBuilder::new(&["check", "status", "residual", "tolerance", "detail"]);
    for c in &checks {
        report.push_str(&c.line());
        report.push('\n');
        csv.row(&[
            c.name.to_owned(),
            if c.pass { "PASS" } else { "FAIL" }.to_owned(),
            format!("{:.16e}", c.residual),
            format!("{:.16e}", c.tolerance),
            c.detail.clone(),
        ]);
    }
    report.push_str(&format!("summary: {passed}/{} checks passed\n", checks.len()));
    let status = if passed == checks.len() { Status::Ok } else { Status::VerifyFailed };
    Ok(CommandOutput { csv: csv.finish(), report: Some(report), status, warning: None })
}
