//! Physical constants in SI units (CODATA 2022).

use crate::scalar::{lit, Real};

/// Speed of light in vacuum, m/s (exact).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Reduced Planck constant, J s (h / 2pi with exact h).
pub const HBAR: f64 = 1.054_571_817_646_156_5e-34;
/// Boltzmann constant, J/K (exact).
pub const BOLTZMANN: f64 = 1.380_649e-23;
/// Vacuum electric permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_818_8e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants<T> {
    pub c: T,
    pub hbar: T,
    pub k_b: T,
    pub epsilon_0: T,
}

impl<T: Real> PhysicalConstants<T> {
    pub fn codata() -> Self {
        Self {
            c: lit(SPEED_OF_LIGHT),
            hbar: lit(HBAR),
            k_b: lit(BOLTZMANN),
            epsilon_0: lit(EPSILON_0),
        }
    }

    /// `4 pi eps0`, the factor between polarizability volume and SI polarizability.
    pub fn four_pi_eps0(&self) -> T {
        lit::<T>(4.0) * T::PI() * self.epsilon_0
    }
}

impl<T: Real> Default for PhysicalConstants<T> {
    fn default() -> Self {
        Self::codata()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive() {
        let k = PhysicalConstants::<f64>::codata();
        assert!(k.c > 0.0 && k.hbar > 0.0 && k.k_b > 0.0 && k.epsilon_0 > 0.0);
    }

    #[test]
    fn hbar_is_h_over_two_pi() {
        let h = 6.626_070_15e-34;
        assert!((HBAR - h / (2.0 * std::f64::consts::PI)).abs() / HBAR < 1e-15);
    }
}
