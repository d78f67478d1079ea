//! Directions on the unit sphere and pairs of orientations about z.

use crate::error::{Error, Result};
use crate::linalg::Vec3;
use crate::scalar::Real;

/// Reduces an angle to the half-open interval `(-pi, pi]`.
pub fn reduce_angle<T: Real>(angle: T) -> T {
    let two_pi = T::TAU();
    let mut r = angle % two_pi;
    if r > T::PI() {
        r = r - two_pi;
    } else if r <= -T::PI() {
        r = r + two_pi;
    }
    r
}

/// A unit vector in spherical coordinates, `theta` in `[0, pi]`, `phi` in `[0, 2pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitDirection<T> {
    theta: T,
    phi: T,
}

impl<T: Real> UnitDirection<T> {
    /// `phi` is wrapped into `[0, 2pi)`; `theta` must lie in `[0, pi]`.
    pub fn new(theta: T, phi: T) -> Result<Self> {
        if !(theta >= T::zero() && theta <= T::PI()) {
            return Err(Error::Domain {
                function: "UnitDirection::new",
                value: theta.to_f64().unwrap_or(f64::NAN),
            });
        }
        if !phi.is_finite() {
            return Err(Error::Domain {
                function: "UnitDirection::new",
                value: phi.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(Self { theta, phi: wrap_phi(phi) })
    }

    pub fn from_cartesian(v: &Vec3<T>) -> Result<Self> {
        let r = v.norm();
        if !(r > T::zero()) || !r.is_finite() {
            return Err(Error::invalid("cannot take the direction of a zero vector"));
        }
        let cos_t = (v.z() / r).max(-T::one()).min(T::one());
        Self::new(cos_t.acos(), v.y().atan2(v.x()))
    }

    pub fn z_axis() -> Self {
        Self { theta: T::zero(), phi: T::zero() }
    }

    pub fn theta(&self) -> T {
        self.theta
    }

    pub fn phi(&self) -> T {
        self.phi
    }

    pub fn to_cartesian(&self) -> Vec3<T> {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        Vec3::new(st * cp, st * sp, ct)
    }
}

fn wrap_phi<T: Real>(phi: T) -> T {
    let two_pi = T::TAU();
    let mut p = phi % two_pi;
    if p < T::zero() {
        p = p + two_pi;
    }
    // `-tiny % 2pi + 2pi` can round up to exactly 2pi
    if p >= two_pi {
        p = T::zero();
    }
    p
}

/// Rotates a direction by `alpha` about z with the convention `phi -> phi - alpha`,
/// so that `Y_lm(rotated) = exp(-i m alpha) Y_lm(original)`.
pub fn rotate_direction_z<T: Real>(d: &UnitDirection<T>, alpha: T) -> UnitDirection<T> {
    UnitDirection { theta: d.theta, phi: wrap_phi(d.phi - alpha) }
}

/// Two superposed orientations about the z axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientationPair<T> {
    pub alpha: T,
    pub alpha_prime: T,
}

impl<T: Real> OrientationPair<T> {
    pub fn new(alpha: T, alpha_prime: T) -> Self {
        Self { alpha, alpha_prime }
    }

    /// `alpha - alpha'` reduced to `(-pi, pi]`.
    pub fn omega(&self) -> T {
        reduce_angle(self.alpha - self.alpha_prime)
    }
}
