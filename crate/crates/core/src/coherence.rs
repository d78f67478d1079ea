//! Rotational density matrix on a discrete set of orientations and its
//! exponential decoherence `d rho(a, a') / dt = -Lambda(a - a') rho(a, a')`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::reduce_angle;
use crate::planck::ThermalBath;
use crate::rates::closed_form_prefactor;
use crate::scalar::{from_usize, lit, Real};
use crate::tensor::PolarizabilityTensor;

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const PSD_TOL: f64 = 1e-10;
/// Orientations closer than this (mod 2pi) count as duplicates.
pub const DUPLICATE_ANGLE_TOL: f64 = 1e-12;

/// `rho(alpha_i, alpha_j)` stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceGrid<T> {
    angles: Vec<T>,
    matrix: Vec<Complex<T>>,
}

impl<T: Real> CoherenceGrid<T> {
    /// Validates distinct angles, Hermiticity, unit trace and positive
    /// semidefiniteness.
    pub fn new(angles: Vec<T>, matrix: Vec<Complex<T>>) -> Result<Self> {
        let n = angles.len();
        if n == 0 {
            return Err(Error::invalid("coherence grid needs at least one angle"));
        }
        if matrix.len() != n * n {
            return Err(Error::invalid(format!(
                "density matrix has {} entries, expected {n}x{n}",
                matrix.len()
            )));
        }
        if angles.iter().any(|a| !a.is_finite()) || matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::invalid("coherence grid has non-finite values"));
        }
        for i in 0..n {
            for j in 0..i {
                if reduce_angle(angles[i] - angles[j]).abs() <= lit(DUPLICATE_ANGLE_TOL) {
                    return Err(Error::invalid(format!("angles {i} and {j} coincide")));
                }
            }
        }
        let grid = Self { angles, matrix };
        for i in 0..n {
            for j in 0..=i {
                if (grid.get(i, j) - grid.get(j, i).conj()).norm() > lit(HERMITIAN_TOL) {
                    return Err(Error::invalid(format!("density matrix is not Hermitian at ({i}, {j})")));
                }
            }
        }
        let trace = (0..n).map(|i| grid.get(i, i).re).fold(T::zero(), |a, b| a + b);
        if (trace - T::one()).abs() > lit(TRACE_TOL) {
            return Err(Error::invalid(format!("density matrix trace is {trace}, expected 1")));
        }
        if !is_psd(&grid.matrix, n, lit(PSD_TOL)) {
            return Err(Error::invalid("density matrix is not positive semidefinite"));
        }
        Ok(grid)
    }

    /// Pure state `|psi><psi|` with `psi_i` the (normalized) amplitude on `angles[i]`.
    pub fn pure(angles: Vec<T>, amplitudes: &[Complex<T>]) -> Result<Self> {
        if amplitudes.len() != angles.len() {
            return Err(Error::invalid("one amplitude per angle required"));
        }
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).fold(T::zero(), |a, b| a + b).sqrt();
        if !(norm > T::zero()) {
            return Err(Error::invalid("amplitudes must not all vanish"));
        }
        let psi: Vec<_> = amplitudes.iter().map(|a| a / norm).collect();
        let matrix = psi.iter().flat_map(|a| psi.iter().map(move |b| a * b.conj())).collect();
        Self::new(angles, matrix)
    }

    /// Equal-weight superposition of all `angles`.
    pub fn equal_superposition(angles: Vec<T>) -> Result<Self> {
        let n = angles.len();
        let amp = vec![Complex::new(T::one() / from_usize::<T>(n.max(1)).sqrt(), T::zero()); n];
        Self::pure(angles, &amp)
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[T] {
        &self.angles
    }

    pub fn get(&self, i: usize, j: usize) -> Complex<T> {
        self.matrix[i * self.angles.len() + j]
    }

    pub fn matrix(&self) -> &[Complex<T>] {
        &self.matrix
    }

    pub fn is_positive_semidefinite(&self) -> bool {
        is_psd(&self.matrix, self.len(), lit(PSD_TOL))
    }
}

/// Cholesky factorization of `m + tol I`; success means every eigenvalue is above `-tol`.
fn is_psd<T: Real>(m: &[Complex<T>], n: usize, tol: T) -> bool {
    let mut l = vec![Complex::new(T::zero(), T::zero()); n * n];
    for j in 0..n {
        let mut d = m[j * n + j].re + tol;
        for k in 0..j {
            d = d - l[j * n + k].norm_sqr();
        }
        if !(d > T::zero()) {
            return false;
        }
        let djj = d.sqrt();
        l[j * n + j] = Complex::new(djj, T::zero());
        for i in (j + 1)..n {
            let mut s = m[i * n + j];
            for k in 0..j {
                s = s - l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / djj;
        }
    }
    true
}

/// `rho_ij(t) = rho_ij(0) exp(-Lambda(alpha_i - alpha_j) t)` with the closed-form rate.
pub fn evolve_coherences<T: Real>(
    rho0: &CoherenceGrid<T>,
    bath: &ThermalBath<T>,
    alpha0: &PolarizabilityTensor<T>,
    t: T,
) -> Result<CoherenceGrid<T>> {
    if !(t >= T::zero()) || !t.is_finite() {
        return Err(Error::invalid(format!("evolution time must be finite and non-negative, got {t}")));
    }
    let prefactor = closed_form_prefactor(bath, alpha0)?;
    let n = rho0.len();
    let mut matrix = rho0.matrix.clone();
    // one decay factor per unordered pair keeps the result exactly Hermitian
    for i in 0..n {
        for j in (i + 1)..n {
            let s = reduce_angle(rho0.angles[i] - rho0.angles[j]).sin();
            let decay = (-(prefactor * s * s) * t).exp();
            matrix[i * n + j] = matrix[i * n + j] * decay;
            matrix[j * n + i] = matrix[j * n + i] * decay;
        }
    }
    Ok(CoherenceGrid { angles: rho0.angles.clone(), matrix })
}
