//! Thermal photon bath: Planck occupation and its power moments.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::quad1d;
use crate::scalar::{from_usize, lit, Real};
use crate::special::{factorial, riemann_zeta_int};

/// Upper limit of the numeric moment integral in units of `k_B T / (hbar c)`.
pub const NUMERIC_CUTOFF_X: f64 = 40.0;

/// Blackbody radiation at a fixed temperature (K).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThermalBath<T> {
    temperature: T,
    constants: PhysicalConstants<T>,
}

impl<T: Real> ThermalBath<T> {
    pub fn new(temperature: T) -> Result<Self> {
        if !(temperature > T::zero()) || !temperature.is_finite() {
            return Err(Error::invalid(format!(
                "temperature must be positive and finite, got {temperature}"
            )));
        }
        Ok(Self { temperature, constants: PhysicalConstants::codata() })
    }

    pub fn temperature(&self) -> T {
        self.temperature
    }

    pub fn constants(&self) -> &PhysicalConstants<T> {
        &self.constants
    }

    /// `k_T = k_B T / (hbar c)` in 1/m.
    pub fn thermal_wavenumber(&self) -> T {
        let k = &self.constants;
        k.k_b * self.temperature / (k.hbar * k.c)
    }

    fn reduced(&self, k: T) -> T {
        k / self.thermal_wavenumber()
    }

    /// Two-polarization Planck occupation `2 / (exp(hbar c k / k_B T) - 1)`.
    pub fn occupation(&self, k: T) -> Result<T> {
        if !(k > T::zero()) {
            return Err(Error::Domain { function: "occupation", value: k.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(lit::<T>(2.0) / self.reduced(k).exp_m1())
    }

    /// Photon number density per unit wavenumber, `n rho(k) = 4 pi k^2 * occupation(k)` (1/m^4).
    pub fn spectral_weight(&self, k: T) -> Result<T> {
        Ok(lit::<T>(4.0) * T::PI() * k * k * self.occupation(k)?)
    }

    /// `M_n = integral_0^inf k^n / (exp(hbar c k / k_B T) - 1) dk = n! zeta(n+1) k_T^(n+1)`.
    pub fn photon_moment_closed(&self, n: u32) -> Result<T> {
        check_moment_order(n)?;
        let kt = self.thermal_wavenumber();
        Ok(factorial::<T>(n)? * riemann_zeta_int::<T>(n + 1)? * kt.powi(n as i32 + 1))
    }

    /// Same moment by adaptive quadrature of `x^n / (e^x - 1)` on `[0, 40]`
    /// plus the exact tail `sum_j integral_40^inf x^n e^{-j x} dx`.
    pub fn photon_moment_numeric(&self, n: u32, reltol: T) -> Result<T> {
        check_moment_order(n)?;
        if !(reltol >= lit(1e-13)) {
            return Err(Error::invalid(format!("reltol must be >= 1e-13, got {reltol}")));
        }
        let ni = n as i32;
        let cutoff = lit::<T>(NUMERIC_CUTOFF_X);
        // quadrature tolerance tighter than requested so the sum stays inside reltol
        let body = quad1d::integrate(
            |x: T| x.powi(ni) / x.exp_m1(),
            T::zero(),
            cutoff,
            reltol / lit(4.0),
            T::zero(),
        )?;
        let tail = bose_tail(n, cutoff);
        Ok((body + tail) * self.thermal_wavenumber().powi(ni + 1))
    }
}

fn check_moment_order(n: u32) -> Result<()> {
    if n < 2 {
        return Err(Error::Domain { function: "photon moment", value: n as f64 });
    }
    Ok(())
}

/// `integral_X^inf x^n / (e^x - 1) dx` via the geometric series of the Bose factor
/// and the closed-form incomplete gamma for integer `n`.
pub(crate) fn bose_tail<T: Real>(n: u32, x0: T) -> T {
    let mut total = T::zero();
    for j in 1..=8usize {
        let jf = from_usize::<T>(j);
        // integral_X^inf x^n e^{-j x} dx = e^{-jX} sum_{i=0}^n n!/i! X^i / j^{n-i+1}
        let mut term_sum = T::zero();
        let mut coeff = T::one(); // n!/i!, built from i = n downward
        for i in (0..=n).rev() {
            term_sum = term_sum + coeff * x0.powi(i as i32) / jf.powi((n - i) as i32 + 1);
            coeff = coeff * from_usize::<T>(i as usize);
        }
        total = total + (-jf * x0).exp() * term_sum;
    }
    total
}
