//! Rotational decoherence rate from the closed form and from direct quadrature
//! of the squared amplitude difference.

use std::fmt;

use crate::error::{Error, Result};
use crate::geometry::reduce_angle;
use crate::planck::ThermalBath;
use crate::quadrature::{build_sphere_grid, integrate_product, MAX_GRID_ORDER};
use crate::scalar::{lit, Real};
use crate::scattering::{pair_kernel, PolarizationConvention};
use crate::tensor::{delta_polarizability, PolarizabilityTensor};

/// Relative reltol for the numeric sixth photon moment.
pub const MOMENT_RELTOL: f64 = 1e-13;
/// Largest relative change under grid refinement accepted as converged.
pub const RATE_REFINEMENT_TOL: f64 = 1e-9;
/// Smallest grid order accepted by [`lambda_numeric`].
pub const MIN_RATE_GRID_ORDER: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateMethod {
    ClosedForm,
    Numeric,
}

impl fmt::Display for RateMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::ClosedForm => "closed-form",
            Self::Numeric => "numeric",
        })
    }
}

/// Quadrature bookkeeping of a numeric rate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridMeta<T> {
    pub grid_order: u32,
    pub refined_order: u32,
    pub moment_reltol: T,
    /// `|rate(L) - rate(L')| / rate(L)`, zero when both vanish.
    pub refinement_drift: T,
    pub converged: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult<T> {
    /// Decoherence rate in 1/s.
    pub lambda: T,
    pub method: RateMethod,
    pub grid: Option<GridMeta<T>>,
}

impl<T: Real> RateResult<T> {
    pub fn converged(&self) -> bool {
        self.grid.is_none_or(|g| g.converged)
    }
}

/// `6! 2c / (9 eps0^2) (k_B T / hbar c)^7 zeta(7) (alpha_x - alpha_y)^2 sin^2(w)`.
pub fn lambda_closed_form<T: Real>(
    bath: &ThermalBath<T>,
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
) -> Result<RateResult<T>> {
    Ok(RateResult {
        lambda: closed_form_prefactor(bath, alpha0)? * sin_sqr(omega),
        method: RateMethod::ClosedForm,
        grid: None,
    })
}

/// Everything in the closed form except `sin^2(w)`.
pub(crate) fn closed_form_prefactor<T: Real>(
    bath: &ThermalBath<T>,
    alpha0: &PolarizabilityTensor<T>,
) -> Result<T> {
    if !alpha0.is_diagonal() {
        return Err(Error::invalid(
            "closed-form rate needs a diagonal polarizability; rotate the tensor to its principal axes first",
        ));
    }
    let (ax, ay, _) = alpha0.principal();
    let k = bath.constants();
    // 6! zeta(7) k_T^7, with k_T^7 taken as a single power
    let moment = bath.photon_moment_closed(6)?;
    let anis = ax - ay;
    Ok(lit::<T>(2.0) * k.c / (lit::<T>(9.0) * k.epsilon_0 * k.epsilon_0) * moment * anis * anis)
}

fn sin_sqr<T: Real>(omega: T) -> T {
    let s = reduce_angle(omega).sin();
    s * s
}

/// Angular integral of the polarization-reduced difference kernel over S^2 x S^2.
pub fn angular_delta_integral<T: Real>(
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
    grid_order: u32,
    conv: PolarizationConvention,
) -> Result<T> {
    let grid = build_sphere_grid::<T>(grid_order)?;
    let delta = delta_polarizability(alpha0, reduce_angle(omega));
    integrate_product(&[&grid, &grid], |n| pair_kernel(&n[0].cartesian, &n[1].cartesian, &delta, conv))
}

/// Rate by separable quadrature: the angular integral of the difference kernel,
/// divided by `8 pi`, times `c integral n rho(k) k^4 dk / (4 pi eps0)^2`, with
/// the sixth photon moment evaluated numerically. The grid is refined by four
/// orders to flag under-resolution.
pub fn lambda_numeric<T: Real>(
    bath: &ThermalBath<T>,
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
    grid_order: u32,
    conv: PolarizationConvention,
) -> Result<RateResult<T>> {
    if !(MIN_RATE_GRID_ORDER..=MAX_GRID_ORDER).contains(&grid_order) {
        return Err(Error::invalid(format!(
            "numeric rate needs grid order in {MIN_RATE_GRID_ORDER}..={MAX_GRID_ORDER}, got {grid_order}"
        )));
    }
    let refined_order = if grid_order + 4 <= MAX_GRID_ORDER { grid_order + 4 } else { grid_order - 4 };
    let reltol = lit::<T>(MOMENT_RELTOL);
    let moment = bath.photon_moment_numeric(6, reltol)?;
    let k = bath.constants();
    let pi = T::PI();
    // n rho(k) = 8 pi k^2 / (e^x - 1)  =>  integral n rho k^4 dk = 8 pi M_6
    let radial = k.c * lit::<T>(8.0) * pi * moment
        / (lit::<T>(8.0) * pi * lit::<T>(16.0) * pi * pi * k.epsilon_0 * k.epsilon_0);

    let coarse = angular_delta_integral(alpha0, omega, grid_order, conv)? * radial;
    let fine = angular_delta_integral(alpha0, omega, refined_order, conv)? * radial;
    let drift = relative_change(coarse, fine);
    Ok(RateResult {
        lambda: coarse,
        method: RateMethod::Numeric,
        grid: Some(GridMeta {
            grid_order,
            refined_order,
            moment_reltol: reltol,
            refinement_drift: drift,
            converged: drift <= lit(RATE_REFINEMENT_TOL),
        }),
    })
}

pub(crate) fn relative_change<T: Real>(a: T, b: T) -> T {
    let scale = a.abs().max(b.abs());
    if scale == T::zero() {
        T::zero()
    } else {
        (a - b).abs() / scale
    }
}

/// Coherence lifetime `1 / Lambda`, or no decay at all.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DecoherenceTime<T> {
    Finite(T),
    Infinite,
}

impl<T: Real> DecoherenceTime<T> {
    pub fn from_rate(lambda: T) -> Self {
        if lambda > T::zero() {
            Self::Finite(lambda.recip())
        } else {
            Self::Infinite
        }
    }

    pub fn seconds(&self) -> Option<T> {
        match self {
            Self::Finite(t) => Some(*t),
            Self::Infinite => None,
        }
    }
}

pub fn decoherence_time<T: Real>(
    bath: &ThermalBath<T>,
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
) -> Result<DecoherenceTime<T>> {
    Ok(DecoherenceTime::from_rate(lambda_closed_form(bath, alpha0, omega)?.lambda))
}
