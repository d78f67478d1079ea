//! Rotational decoherence of an anisotropic dielectric particle scattering
//! thermal photons.
//!
//! The library evaluates the decoherence rate between two orientations of a
//! particle about the z axis both from its closed form and by direct
//! quadrature of the scattering integrals, decomposes the rate into
//! partial waves, and evolves rotational coherences under the resulting
//! master equation.
//!
//! Numerics are generic over [`Real`] (`f32`/`f64`); the aliases below fix
//! `f64`, which SI-valued rates require.

// `!(x > 0)` is used on purpose so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod coherence;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod linalg;
pub mod partial_waves;
pub mod planck;
pub mod quad1d;
pub mod quadrature;
pub mod rates;
pub mod scalar;
pub mod scattering;
pub mod special;
pub mod summation;
pub mod tensor;

pub use error::{Error, Result};
pub use scalar::Real;

pub type Mat3 = linalg::Mat3<f64>;
pub type Vec3 = linalg::Vec3<f64>;
pub type UnitDirection = geometry::UnitDirection<f64>;
pub type OrientationPair = geometry::OrientationPair<f64>;
pub type PolarizabilityTensor = tensor::PolarizabilityTensor<f64>;
pub type PhysicalConstants = constants::PhysicalConstants<f64>;
pub type ThermalBath = planck::ThermalBath<f64>;
pub type SphereGrid = quadrature::SphereGrid<f64>;
pub type ScatteringKernelInputs = scattering::ScatteringKernelInputs<f64>;
pub type RateResult = rates::RateResult<f64>;
pub type CoherenceGrid = coherence::CoherenceGrid<f64>;
pub type PartialWaveTable = partial_waves::PartialWaveTable<f64>;

pub use scattering::PolarizationConvention;
pub use special::SphericalHarmonicIndex;
