//! Induced-dipole photon scattering amplitudes and the polarization-reduced
//! angular kernels entering the decoherence rate.
//!
//! All kernels exclude the `k^4 / (4 pi eps0)^2` prefactor; callers apply it once.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::UnitDirection;
use crate::linalg::{Mat3, Vec3};
use crate::scalar::{lit, Real};
use crate::tensor::{delta_polarizability, PolarizabilityTensor};

/// How photon polarizations enter the squared amplitude.
///
/// The three transverse modes sum `(I - k k^T)` projectors over the
/// outgoing/incoming polarizations and then average (divide by 2) over none,
/// the incoming, or both. `DirectionContracted` contracts the tensor with the
/// propagation directions themselves, `f ~ k_out . alpha . k_in`.
///
/// Angular integration of the difference kernel gives `(8 pi / 3)^2 c |dA|_F^2`
/// for the transverse modes (from `integral (I - k k^T) dOmega = (8 pi/3) I`) and
/// `(4 pi / 3)^2 |dA|_F^2` for the contracted one. The closed-form rate
/// `6! 2c / (9 eps0^2) ...` requires `(4 pi / 3)^2`, hence `AvgAvg`
/// (`c = 1/4`) is the default; `DirectionContracted` matches it as well and is
/// the only mode whose partial waves are confined to `l = l' = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum PolarizationConvention {
    SumSum,
    AvgSum,
    #[default]
    AvgAvg,
    DirectionContracted,
}

impl PolarizationConvention {
    pub const ALL: [Self; 4] = [Self::SumSum, Self::AvgSum, Self::AvgAvg, Self::DirectionContracted];

    /// Multiplier `c(conv)` applied to the projector trace.
    pub fn factor<T: Real>(self) -> T {
        match self {
            Self::SumSum | Self::DirectionContracted => T::one(),
            Self::AvgSum => lit(0.5),
            Self::AvgAvg => lit(0.25),
        }
    }

    pub fn is_transverse(self) -> bool {
        !matches!(self, Self::DirectionContracted)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::SumSum => "sum-sum",
            Self::AvgSum => "avg-sum",
            Self::AvgAvg => "avg-avg",
            Self::DirectionContracted => "contracted",
        }
    }
}

impl fmt::Display for PolarizationConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PolarizationConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('_', "-");
        Self::ALL
            .into_iter()
            .find(|c| c.as_str() == norm)
            .ok_or_else(|| {
                Error::invalid(format!(
                    "unknown polarization convention '{s}' (expected sum-sum, avg-sum, avg-avg or contracted)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScatteringKernelInputs<T> {
    pub k: T,
    pub k_out: UnitDirection<T>,
    pub k_in: UnitDirection<T>,
    pub tensor: PolarizabilityTensor<T>,
}

const TRANSVERSE_TOL: f64 = 1e-12;

/// Dipole scattering amplitude `k^2 / (4 pi eps0) xi_out . alpha . xi_in`.
pub fn amplitude<T: Real>(
    inputs: &ScatteringKernelInputs<T>,
    pol_out: &Vec3<T>,
    pol_in: &Vec3<T>,
) -> Result<Complex<T>> {
    if !(inputs.k > T::zero()) {
        return Err(Error::invalid("wavenumber must be positive"));
    }
    let tol = lit::<T>(TRANSVERSE_TOL);
    for (pol, dir, name) in [(pol_out, &inputs.k_out, "outgoing"), (pol_in, &inputs.k_in, "incoming")] {
        if (pol.norm() - T::one()).abs() > tol {
            return Err(Error::invalid(format!("{name} polarization is not a unit vector")));
        }
        if pol.dot(&dir.to_cartesian()).abs() > tol {
            return Err(Error::invalid(format!("{name} polarization is not transverse")));
        }
    }
    let four_pi_eps0 = crate::constants::PhysicalConstants::<T>::codata().four_pi_eps0();
    let value = inputs.k * inputs.k / four_pi_eps0 * inputs.tensor.matrix().bilinear(pol_out, pol_in);
    Ok(Complex::new(value, T::zero()))
}

/// `I - d d^T`.
pub fn transverse_projector<T: Real>(d: &UnitDirection<T>) -> Mat3<T> {
    projector(&d.to_cartesian())
}

pub(crate) fn projector<T: Real>(v: &Vec3<T>) -> Mat3<T> {
    Mat3::identity() - v.outer(v)
}

/// Polarization-reduced `|xi' . (alpha0 - alpha_w) . xi|^2` for outgoing `k_out`
/// and incoming `p_in`.
pub fn delta_kernel<T: Real>(
    k_out: &UnitDirection<T>,
    p_in: &UnitDirection<T>,
    alpha0: &PolarizabilityTensor<T>,
    omega: T,
    conv: PolarizationConvention,
) -> T {
    let delta = delta_polarizability(alpha0, omega);
    pair_kernel(&k_out.to_cartesian(), &p_in.to_cartesian(), &delta, conv)
}

/// [`delta_kernel`] on Cartesian unit vectors with a precomputed difference tensor.
pub(crate) fn pair_kernel<T: Real>(
    k: &Vec3<T>,
    p: &Vec3<T>,
    delta: &Mat3<T>,
    conv: PolarizationConvention,
) -> T {
    if conv.is_transverse() {
        let a = projector(k) * *delta;
        let b = projector(p) * delta.transpose();
        conv.factor::<T>() * a.trace_product(&b)
    } else {
        let f = delta.bilinear(k, p);
        f * f
    }
}

/// Polarization-reduced `f*(k1, p1) f(k2, p2)` with amplitudes built from
/// `tensor_a` and `tensor_b`. Transverse modes chain one projector per direction,
/// `c Tr[P(k1) A P(p1) P(p2) B^T P(k2)]`, which reduces to [`delta_kernel`] for
/// coincident directions and `A = B = dA`.
pub fn cross_kernel<T: Real>(
    k1: &UnitDirection<T>,
    p1: &UnitDirection<T>,
    k2: &UnitDirection<T>,
    p2: &UnitDirection<T>,
    tensor_a: &Mat3<T>,
    tensor_b: &Mat3<T>,
    conv: PolarizationConvention,
) -> T {
    let (k1, p1, k2, p2) = (k1.to_cartesian(), p1.to_cartesian(), k2.to_cartesian(), p2.to_cartesian());
    let left = half_kernel_left(&k1, &p1, tensor_a, conv);
    let right = half_kernel_right(&k2, &p2, tensor_b, conv);
    left.combine(&right, conv)
}

/// One amplitude's share of a [`cross_kernel`], reusable across node pairs.
#[derive(Debug, Clone, Copy)]
pub(crate) enum HalfKernel<T> {
    Transverse(Mat3<T>),
    Contracted(T),
}

impl<T: Real> HalfKernel<T> {
    pub(crate) fn combine(&self, other: &Self, conv: PolarizationConvention) -> T {
        match (self, other) {
            (Self::Transverse(a), Self::Transverse(b)) => conv.factor::<T>() * a.trace_product(b),
            (Self::Contracted(a), Self::Contracted(b)) => *a * *b,
            _ => unreachable!("half kernels built with different conventions"),
        }
    }
}

/// `P(k) A P(p)` or `k . A . p`.
pub(crate) fn half_kernel_left<T: Real>(
    k: &Vec3<T>,
    p: &Vec3<T>,
    a: &Mat3<T>,
    conv: PolarizationConvention,
) -> HalfKernel<T> {
    if conv.is_transverse() {
        HalfKernel::Transverse(projector(k) * *a * projector(p))
    } else {
        HalfKernel::Contracted(a.bilinear(k, p))
    }
}

/// `P(p) B^T P(k)` or `k . B . p`.
pub(crate) fn half_kernel_right<T: Real>(
    k: &Vec3<T>,
    p: &Vec3<T>,
    b: &Mat3<T>,
    conv: PolarizationConvention,
) -> HalfKernel<T> {
    if conv.is_transverse() {
        HalfKernel::Transverse(projector(p) * b.transpose() * projector(k))
    } else {
        HalfKernel::Contracted(b.bilinear(k, p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dir(t: f64, p: f64) -> UnitDirection<f64> {
        UnitDirection::new(t, p).unwrap()
    }

    fn inputs(tensor: PolarizabilityTensor<f64>) -> ScatteringKernelInputs<f64> {
        ScatteringKernelInputs { k: 2.0e5, k_out: dir(0.0, 0.0), k_in: dir(0.0, 0.0), tensor }
    }

    #[test]
    fn amplitude_basic_cases() {
        let x = Vec3::new(1.0, 0.0, 0.0);
        let y = Vec3::new(0.0, 1.0, 0.0);
        let zero = inputs(PolarizabilityTensor::zero());
        assert_eq!(amplitude(&zero, &x, &x).unwrap(), Complex::new(0.0, 0.0));

        let iso = inputs(PolarizabilityTensor::diagonal(1e-35, 1e-35, 1e-35).unwrap());
        assert_eq!(amplitude(&iso, &x, &y).unwrap().norm(), 0.0);

        let t = PolarizabilityTensor::diagonal(3e-35, 2e-35, 1e-35).unwrap();
        let inp = inputs(t);
        let f = amplitude(&inp, &x, &x).unwrap();
        let want = inp.k * inp.k * 3e-35 / (4.0 * std::f64::consts::PI * crate::constants::EPSILON_0);
        assert!((f.re / want - 1.0).abs() < 1e-15 && f.im == 0.0);
    }

    #[test]
    fn amplitude_rejects_longitudinal_polarization() {
        let t = PolarizabilityTensor::diagonal(1.0, 1.0, 1.0).unwrap();
        let z = Vec3::new(0.0, 0.0, 1.0);
        let x = Vec3::new(1.0, 0.0, 0.0);
        assert!(amplitude(&inputs(t), &z, &x).is_err());
        assert!(amplitude(&inputs(t), &x, &x.scale(2.0)).is_err());
    }

    #[test]
    fn projector_properties() {
        let p = transverse_projector(&UnitDirection::<f64>::z_axis());
        assert_eq!(p, Mat3::diagonal(1.0, 1.0, 0.0));
        let d = dir(1.2, 5.1);
        let p = transverse_projector(&d);
        assert!((p.trace() - 2.0).abs() < 1e-15);
        assert!(p.mul_vec(&d.to_cartesian()).norm() < 1e-15);
        assert!(((p * p) - p).max_abs() < 1e-15);
    }

    #[test]
    fn kernels_vanish_without_anisotropy_or_angle() {
        let iso = PolarizabilityTensor::diagonal(2.0, 2.0, 2.0).unwrap();
        let ani = PolarizabilityTensor::diagonal(3.0, 1.0, 0.5).unwrap();
        let (k, p) = (dir(0.3, 1.0), dir(2.0, 4.0));
        for conv in PolarizationConvention::ALL {
            assert_eq!(delta_kernel(&k, &p, &iso, 0.7, conv), 0.0);
            assert_eq!(delta_kernel(&k, &p, &ani, 0.0, conv), 0.0);
        }
    }

    #[test]
    fn cross_kernel_reduces_to_delta_kernel() {
        let t = PolarizabilityTensor::diagonal(3.0, 1.0, 0.5).unwrap();
        let w = 0.9;
        let d = delta_polarizability(&t, w);
        let (k, p) = (dir(0.3, 1.0), dir(2.0, 4.0));
        for conv in PolarizationConvention::ALL {
            let a = cross_kernel(&k, &p, &k, &p, &d, &d, conv);
            let b = delta_kernel(&k, &p, &t, w, conv);
            assert!((a - b).abs() <= 1e-14 * b.abs());
            assert_eq!(cross_kernel(&k, &p, &k, &p, &d, &Mat3::zero(), conv), 0.0);
        }
    }

    #[test]
    fn convention_parsing() {
        for c in PolarizationConvention::ALL {
            assert_eq!(c.as_str().parse::<PolarizationConvention>().unwrap(), c);
        }
        assert_eq!("AVG_AVG".parse::<PolarizationConvention>().unwrap(), PolarizationConvention::AvgAvg);
        assert!("avg".parse::<PolarizationConvention>().is_err());
        assert_eq!(PolarizationConvention::default(), PolarizationConvention::AvgAvg);
    }
}
