//! Polarizability tensors and their rotation about the z axis.

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::linalg::Mat3;
use crate::scalar::{lit, Real};

/// Real symmetric, positive semidefinite electric polarizability (C m^2 / V).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizabilityTensor<T> {
    m: Mat3<T>,
}

impl<T: Real> PolarizabilityTensor<T> {
    /// Validates exact symmetry and non-negative eigenvalues.
    pub fn new(m: Mat3<T>) -> Result<Self> {
        if m.0.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::invalid("polarizability tensor has non-finite entries"));
        }
        if !m.is_symmetric() {
            return Err(Error::invalid("polarizability tensor must be symmetric"));
        }
        if !is_positive_semidefinite(&m) {
            return Err(Error::invalid("polarizability tensor must have non-negative eigenvalues"));
        }
        Ok(Self { m })
    }

    pub fn diagonal(ax: T, ay: T, az: T) -> Result<Self> {
        Self::new(Mat3::diagonal(ax, ay, az))
    }

    pub fn zero() -> Self {
        Self { m: Mat3::zero() }
    }

    pub fn matrix(&self) -> &Mat3<T> {
        &self.m
    }

    pub fn is_diagonal(&self) -> bool {
        let z = T::zero();
        let m = &self.m.0;
        m[0][1] == z && m[0][2] == z && m[1][2] == z
    }

    /// `(alpha_x, alpha_y, alpha_z)`, the diagonal entries.
    pub fn principal(&self) -> (T, T, T) {
        (self.m[(0, 0)], self.m[(1, 1)], self.m[(2, 2)])
    }
}

/// Sylvester-type test on all principal minors with a relative tolerance.
fn is_positive_semidefinite<T: Real>(m: &Mat3<T>) -> bool {
    let scale = m.max_abs();
    if scale == T::zero() {
        return true;
    }
    let tol = lit::<T>(1e-12);
    let d = m.scale(T::one() / scale);
    let diag_ok = (0..3).all(|i| d[(i, i)] >= -tol);
    let minors_ok = [(0, 1), (0, 2), (1, 2)]
        .iter()
        .all(|&(i, j)| d[(i, i)] * d[(j, j)] - d[(i, j)] * d[(j, i)] >= -tol);
    diag_ok && minors_ok && d.determinant() >= -tol
}

/// `alpha0 - R_z(w)^T alpha0 R_z(w)`, written out per entry so that
/// z-rotation-invariant tensors and `w = 0` give an exact zero.
pub fn delta_polarizability<T: Real>(alpha0: &PolarizabilityTensor<T>, omega: T) -> Mat3<T> {
    let m = &alpha0.m;
    let (s, c) = omega.sin_cos();
    let two = lit::<T>(2.0);
    let half_sin = (omega / two).sin();
    let one_minus_cos = two * half_sin * half_sin;

    let (p, q, r) = (m[(0, 0)], m[(0, 1)], m[(1, 1)]);
    let (u, v) = (m[(0, 2)], m[(1, 2)]);

    let xx = s * s * (p - r) - two * c * s * q;
    let yy = -xx;
    let xy = c * s * (p - r) + two * s * s * q;
    let xz = one_minus_cos * u - s * v;
    let yz = s * u + one_minus_cos * v;
    Mat3([[xx, xy, xz], [xy, yy, yz], [xz, yz, T::zero()]])
}

/// `R_z(w)^T alpha0 R_z(w)` with `R_z` the active right-handed rotation.
pub fn rotate_polarizability<T: Real>(
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
) -> PolarizabilityTensor<T> {
    // symmetric by construction; a similarity transform keeps the spectrum
    PolarizabilityTensor { m: alpha0.m - delta_polarizability(alpha0, omega) }
}

/// Diagonal SI polarizability `4 pi eps0 * volume` from per-axis polarizability volumes (m^3).
pub fn polarizability_from_volume<T: Real>(vol: [T; 3]) -> Result<PolarizabilityTensor<T>> {
    if vol.iter().any(|v| !(*v >= T::zero()) || !v.is_finite()) {
        return Err(Error::invalid("polarizability volumes must be finite and non-negative"));
    }
    let f = PhysicalConstants::<T>::codata().four_pi_eps0();
    PolarizabilityTensor::diagonal(f * vol[0], f * vol[1], f * vol[2])
}
