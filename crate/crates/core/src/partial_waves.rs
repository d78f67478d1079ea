//! Partial-wave decomposition of the decoherence rate.
//!
//! After the addition theorem the channel integrals read
//!
//! `I_ll'(w) = (2l+1)(2l'+1)/(4 pi)^2 int dk' dp' dk'' dp'' P_l(cos g') P_l'(cos g) f*(k', p') f(k'', p'')`
//!
//! with `cos g' = k' . Rz(-w) k''` and `cos g = p' . Rz(-w) p''`, i.e.
//! `cos(phi' - phi'' + w)` in the azimuthal term. The eight-dimensional
//! integral runs as one fused sweep over the product grid; all requested
//! `(l, l')` channels and angles share each kernel evaluation.
//!
//! The dipole amplitude makes every `I_ll'` proportional to `k^4`, so the rate
//! `Lambda_ll' = c (N/V) int dk k^2 mu(k) (I_ll'(0) - I_ll'(w))` collapses to
//! `2 c M_6 (I~(0) - I~(w))` with `I~ = I / k^4` and `M_6` the sixth photon moment.

use rayon::prelude::*;

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};
use crate::geometry::reduce_angle;
use crate::linalg::{Mat3, Vec3};
use crate::planck::ThermalBath;
use crate::quad1d;
use crate::quadrature::{build_sphere_grid, SphereGrid, MAX_GRID_ORDER};
use crate::rates::{lambda_closed_form, MOMENT_RELTOL};
use crate::scalar::{from_usize, lit, Real};
use crate::scattering::{half_kernel_left, half_kernel_right, HalfKernel, PolarizationConvention};
use crate::special::legendre_all;
use crate::summation::pairwise_sum;
use crate::tensor::PolarizabilityTensor;

pub const MAX_PARTIAL_WAVE_L: u32 = 6;
/// Largest relative change of a channel integral under grid refinement.
pub const PARTIAL_WAVE_REFINEMENT_TOL: f64 = 1e-8;

/// How the wavenumber integral of `Lambda_ll'` is carried out.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KIntegration {
    /// Uses `I_ll' ~ k^4` and the closed sixth moment structure.
    #[default]
    Separable,
    /// Adaptive quadrature over `k` of the channel integral at each wavenumber.
    Quadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialWaveOptions {
    /// Product-grid order; `None` picks `2 l_max + 4`.
    pub grid_order: Option<u32>,
    pub convention: PolarizationConvention,
    /// Re-run at `L + 2` and flag channels whose value moves.
    pub refine: bool,
    pub k_integration: KIntegration,
}

impl Default for PartialWaveOptions {
    fn default() -> Self {
        Self {
            grid_order: None,
            convention: PolarizationConvention::DirectionContracted,
            refine: true,
            k_integration: KIntegration::Separable,
        }
    }
}

/// Minimum grid order for channels up to `l_max`.
pub fn min_grid_order(l_max: u32) -> u32 {
    2 * l_max + 4
}

fn check_channel(l: u32, lp: u32, grid_order: u32) -> Result<()> {
    let top = l.max(lp);
    if top > MAX_PARTIAL_WAVE_L {
        return Err(Error::invalid(format!("partial waves limited to l <= {MAX_PARTIAL_WAVE_L}, got {top}")));
    }
    if grid_order < min_grid_order(top) || grid_order > MAX_GRID_ORDER {
        return Err(Error::invalid(format!(
            "grid order {grid_order} under-resolves l = {top}; need {}..={MAX_GRID_ORDER}",
            min_grid_order(top)
        )));
    }
    Ok(())
}

fn refined(order: u32) -> u32 {
    if order + 2 <= MAX_GRID_ORDER {
        order + 2
    } else {
        order - 2
    }
}

/// `(2l+1)(2l'+1) / ((4 pi)^2 (4 pi eps0)^2)`.
fn channel_prefactor<T: Real>(l: u32, lp: u32) -> T {
    let four_pi = lit::<T>(4.0) * T::PI();
    let fpe = PhysicalConstants::<T>::codata().four_pi_eps0();
    from_usize::<T>((2 * l as usize + 1) * (2 * lp as usize + 1)) / (four_pi * four_pi * fpe * fpe)
}

/// Natural magnitude of the channel integrals at unit wavenumber,
/// `|alpha|_F^2 / (9 eps0^2)`, used to judge drift of near-zero channels.
fn integral_scale<T: Real>(tensor: &PolarizabilityTensor<T>) -> T {
    let eps0 = PhysicalConstants::<T>::codata().epsilon_0;
    tensor.matrix().frobenius_norm_sqr() / (lit::<T>(9.0) * eps0 * eps0)
}

/// Raw eight-dimensional sums (no channel prefactor), indexed `[angle][channel]`.
fn sweep<T: Real>(
    grid: &SphereGrid<T>,
    tensor: &Mat3<T>,
    omegas: &[T],
    channels: &[(u32, u32)],
    conv: PolarizationConvention,
) -> Vec<Vec<T>> {
    let nodes = grid.nodes();
    let n = nodes.len();
    let lw = channels.iter().map(|&(l, lp)| l.max(lp)).max().unwrap_or(0) as usize + 1;
    let pos: Vec<Vec3<T>> = nodes.iter().map(|x| x.cartesian).collect();
    let weights: Vec<T> = nodes.iter().map(|x| x.weight).collect();

    // legendre[o][(i * n + j) * lw + l] = P_l(n_i . Rz(-w_o) n_j)
    let legendre: Vec<Vec<T>> = omegas
        .iter()
        .map(|&w| {
            let rot = Mat3::rotation_z(-w);
            let rotated: Vec<Vec3<T>> = pos.iter().map(|v| rot.mul_vec(v)).collect();
            let mut table = vec![T::zero(); n * n * lw];
            for i in 0..n {
                for j in 0..n {
                    let x = pos[i].dot(&rotated[j]).max(-T::one()).min(T::one());
                    legendre_all(x, &mut table[(i * n + j) * lw..(i * n + j + 1) * lw]);
                }
            }
            table
        })
        .collect();

    // left[k' * n + p'] and right[p'' * n + k'']
    let left: Vec<HalfKernel<T>> = (0..n * n)
        .map(|ij| half_kernel_left(&pos[ij / n], &pos[ij % n], tensor, conv))
        .collect();
    let right: Vec<HalfKernel<T>> = (0..n * n)
        .map(|ij| half_kernel_right(&pos[ij % n], &pos[ij / n], tensor, conv))
        .collect();

    let n_acc = omegas.len() * channels.len();
    let blocks: Vec<Vec<Vec<T>>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut per_b = Vec::with_capacity(n);
            for b in 0..n {
                let mut acc = vec![T::zero(); n_acc];
                let lk = &left[a * n + b];
                let w_ab = weights[a] * weights[b];
                for c in 0..n {
                    let w_abc = w_ab * weights[c];
                    for d in 0..n {
                        let kv = lk.combine(&right[d * n + c], conv) * (w_abc * weights[d]);
                        for (o, table) in legendre.iter().enumerate() {
                            let pk = &table[(a * n + c) * lw..];
                            let pp = &table[(b * n + d) * lw..];
                            for (ci, &(l, lp)) in channels.iter().enumerate() {
                                let slot = &mut acc[o * channels.len() + ci];
                                *slot = *slot + kv * pk[l as usize] * pp[lp as usize];
                            }
                        }
                    }
                }
                per_b.push(acc);
            }
            per_b
        })
        .collect();

    let flat: Vec<&Vec<T>> = blocks.iter().flatten().collect();
    (0..omegas.len())
        .map(|o| {
            (0..channels.len())
                .map(|ci| {
                    let column: Vec<T> = flat.iter().map(|acc| acc[o * channels.len() + ci]).collect();
                    pairwise_sum(&column)
                })
                .collect()
        })
        .collect()
}

/// A channel integral with its refinement check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelIntegral<T> {
    pub value: T,
    pub grid_order: u32,
    pub refined_value: Option<T>,
    pub drift: T,
    pub converged: bool,
}

/// `I_ll'(w)` at wavenumber `k` (SI), by eight-dimensional product quadrature.
pub fn i_llprime<T: Real>(
    l: u32,
    lp: u32,
    omega: T,
    k: T,
    tensor: &PolarizabilityTensor<T>,
    grid_order: u32,
    conv: PolarizationConvention,
) -> Result<ChannelIntegral<T>> {
    check_channel(l, lp, grid_order)?;
    if !(k > T::zero()) {
        return Err(Error::invalid("wavenumber must be positive"));
    }
    let omega = reduce_angle(omega);
    let eval = |order: u32| -> Result<T> {
        let grid = build_sphere_grid::<T>(order)?;
        let raw = sweep(&grid, tensor.matrix(), &[omega], &[(l, lp)], conv);
        Ok(channel_prefactor::<T>(l, lp) * raw[0][0])
    };
    let k4 = k.powi(4);
    let value = eval(grid_order)? * k4;
    let fine = eval(refined(grid_order))? * k4;
    let drift = (value - fine).abs() / value.abs().max(integral_scale(tensor) * k4);
    Ok(ChannelIntegral {
        value,
        grid_order,
        refined_value: Some(fine),
        drift,
        converged: drift <= lit(PARTIAL_WAVE_REFINEMENT_TOL),
    })
}

/// `k^4 / (9 eps0^2) (alpha_x^2 + alpha_y^2 + alpha_z^2 - sin^2(w) (alpha_x - alpha_y)^2)`.
pub fn i11_closed<T: Real>(omega: T, k: T, tensor: &PolarizabilityTensor<T>) -> Result<T> {
    if !tensor.is_diagonal() {
        return Err(Error::invalid("closed-form I_11 needs a diagonal polarizability"));
    }
    let (ax, ay, az) = tensor.principal();
    let eps0 = PhysicalConstants::<T>::codata().epsilon_0;
    let s = omega.sin();
    let d = ax - ay;
    Ok(k.powi(4) / (lit::<T>(9.0) * eps0 * eps0) * (-(s * s) * d * d + ax * ax + ay * ay + az * az))
}

/// `c (N/V) k^2 mu(k)` per unit wavenumber, i.e. `n rho(k) / (4 pi)`.
fn channel_radial_weight<T: Real>(bath: &ThermalBath<T>) -> Result<T> {
    // 2 c M_6: the k^4 moment of 2 k^2 / (e^x - 1)
    let c = bath.constants().c;
    Ok(lit::<T>(2.0) * c * bath.photon_moment_numeric(6, lit(MOMENT_RELTOL))?)
}

/// `c int dk n rho(k) / (4 pi) * delta_i(k)` by adaptive quadrature in `x = k / k_T`.
fn radial_quadrature<T: Real, F: Fn(T) -> T>(bath: &ThermalBath<T>, delta_i: F) -> Result<T> {
    let kt = bath.thermal_wavenumber();
    let c = bath.constants().c;
    let upper = lit::<T>(200.0);
    let integral = quad1d::integrate(
        |x: T| {
            if x <= T::zero() {
                return T::zero();
            }
            let k = kt * x;
            lit::<T>(2.0) * k * k / x.exp_m1() * delta_i(k)
        },
        T::zero(),
        upper,
        lit(1e-12),
        T::zero(),
    )?;
    Ok(c * kt * integral)
}

/// One `Lambda_ll'` with the channel integrals it came from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartialWaveEntry<T> {
    pub l: u32,
    pub lp: u32,
    /// `I_ll'(0) / k^4`.
    pub i_zero: T,
    /// `I_ll'(w) / k^4`.
    pub i_omega: T,
    /// Rate contribution in 1/s.
    pub lambda: T,
    pub converged: bool,
}

fn lambda_from_reduced<T: Real>(
    bath: &ThermalBath<T>,
    i_zero: T,
    i_omega: T,
    mode: KIntegration,
) -> Result<T> {
    let diff = i_zero - i_omega;
    match mode {
        KIntegration::Separable => Ok(channel_radial_weight(bath)? * diff),
        KIntegration::Quadrature => radial_quadrature(bath, |k: T| k.powi(4) * diff),
    }
}

/// `Lambda_ll'` for one channel.
pub fn lambda_llprime<T: Real>(
    l: u32,
    lp: u32,
    bath: &ThermalBath<T>,
    tensor: &PolarizabilityTensor<T>,
    omega: T,
    options: &PartialWaveOptions,
) -> Result<PartialWaveEntry<T>> {
    let order = options.grid_order.unwrap_or_else(|| min_grid_order(l.max(lp)));
    check_channel(l, lp, order)?;
    let (values, converged) = channel_sweep(tensor, reduce_angle(omega), &[(l, lp)], order, options)?;
    let (i_omega, i_zero) = values[0];
    Ok(PartialWaveEntry {
        l,
        lp,
        i_zero,
        i_omega,
        lambda: lambda_from_reduced(bath, i_zero, i_omega, options.k_integration)?,
        converged: converged[0],
    })
}

type ChannelValues<T> = (Vec<(T, T)>, Vec<bool>);

/// Reduced `(I(w), I(0))` for each channel plus per-channel convergence flags.
fn channel_sweep<T: Real>(
    tensor: &PolarizabilityTensor<T>,
    omega: T,
    channels: &[(u32, u32)],
    order: u32,
    options: &PartialWaveOptions,
) -> Result<ChannelValues<T>> {
    let run = |order: u32| -> Result<Vec<(T, T)>> {
        let grid = build_sphere_grid::<T>(order)?;
        let raw = sweep(&grid, tensor.matrix(), &[omega, T::zero()], channels, options.convention);
        Ok(channels
            .iter()
            .enumerate()
            .map(|(ci, &(l, lp))| {
                let p = channel_prefactor::<T>(l, lp);
                (p * raw[0][ci], p * raw[1][ci])
            })
            .collect())
    };
    let coarse = run(order)?;
    let flags = if options.refine {
        let fine = run(refined(order))?;
        let scale = integral_scale(tensor);
        coarse
            .iter()
            .zip(&fine)
            .map(|(a, b)| {
                let d0 = (a.0 - b.0).abs() / a.0.abs().max(scale);
                let d1 = (a.1 - b.1).abs() / a.1.abs().max(scale);
                d0.max(d1) <= lit(PARTIAL_WAVE_REFINEMENT_TOL)
            })
            .collect()
    } else {
        vec![true; channels.len()]
    };
    Ok((coarse, flags))
}

/// All channels `0 <= l, l' <= l_max` with shell sums and the comparison
/// against the closed-form rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PartialWaveTable<T> {
    pub l_max: u32,
    pub omega: T,
    pub bath: ThermalBath<T>,
    pub tensor: PolarizabilityTensor<T>,
    pub grid_order: u32,
    pub convention: PolarizationConvention,
    /// Row-major in `(l, l')`.
    pub entries: Vec<PartialWaveEntry<T>>,
    /// `shells[s]` sums the channels with `max(l, l') = s`.
    pub shells: Vec<T>,
    pub total: T,
    /// Closed-form rate when the tensor is diagonal.
    pub closed_form: Option<T>,
    pub converged: bool,
}

impl<T: Real> PartialWaveTable<T> {
    pub fn entry(&self, l: u32, lp: u32) -> Option<&PartialWaveEntry<T>> {
        if l > self.l_max || lp > self.l_max {
            return None;
        }
        self.entries.get((l * (self.l_max + 1) + lp) as usize)
    }

    /// `Lambda_ll' / Lambda_closed`; `None` without a usable closed form.
    pub fn ratio(&self, value: T) -> Option<T> {
        self.closed_form.filter(|c| *c != T::zero()).map(|c| value / c)
    }

    /// Cumulative shell sums over the closed form.
    pub fn partial_sum_ratios(&self) -> Vec<Option<T>> {
        let mut acc = T::zero();
        self.shells
            .iter()
            .map(|s| {
                acc = acc + *s;
                self.ratio(acc)
            })
            .collect()
    }
}

pub fn build_table<T: Real>(
    l_max: u32,
    bath: &ThermalBath<T>,
    tensor: &PolarizabilityTensor<T>,
    omega: T,
    options: &PartialWaveOptions,
) -> Result<PartialWaveTable<T>> {
    if l_max > MAX_PARTIAL_WAVE_L {
        return Err(Error::invalid(format!("l_max must be <= {MAX_PARTIAL_WAVE_L}, got {l_max}")));
    }
    let order = options.grid_order.unwrap_or_else(|| min_grid_order(l_max));
    check_channel(l_max, l_max, order)?;
    let omega = reduce_angle(omega);
    let channels: Vec<(u32, u32)> =
        (0..=l_max).flat_map(|l| (0..=l_max).map(move |lp| (l, lp))).collect();
    let (values, flags) = channel_sweep(tensor, omega, &channels, order, options)?;

    let mut entries = Vec::with_capacity(channels.len());
    let mut shells = vec![T::zero(); l_max as usize + 1];
    for ((&(l, lp), &(i_omega, i_zero)), &converged) in channels.iter().zip(&values).zip(&flags) {
        let lambda = lambda_from_reduced(bath, i_zero, i_omega, options.k_integration)?;
        let s = l.max(lp) as usize;
        shells[s] = shells[s] + lambda;
        entries.push(PartialWaveEntry { l, lp, i_zero, i_omega, lambda, converged });
    }
    let total = pairwise_sum(&entries.iter().map(|e| e.lambda).collect::<Vec<_>>());
    let closed_form = if tensor.is_diagonal() {
        Some(lambda_closed_form(bath, tensor, omega)?.lambda)
    } else {
        None
    };
    Ok(PartialWaveTable {
        l_max,
        omega,
        bath: *bath,
        tensor: *tensor,
        grid_order: order,
        convention: options.convention,
        converged: flags.iter().all(|&f| f),
        entries,
        shells,
        total,
        closed_form,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::polarizability_from_volume;
    use std::f64::consts::FRAC_PI_2;

    fn tensor() -> PolarizabilityTensor<f64> {
        polarizability_from_volume([1.0e-25, 0.5e-25, 0.3e-25]).unwrap()
    }

    #[test]
    fn channel_guards() {
        let t = tensor();
        let conv = PolarizationConvention::DirectionContracted;
        assert!(i_llprime(7, 0, 0.3, 1.0, &t, 20, conv).is_err());
        assert!(i_llprime(2, 1, 0.3, 1.0, &t, 7, conv).is_err());
        assert!(i_llprime(1, 1, 0.3, 0.0, &t, 6, conv).is_err());
        let b = ThermalBath::new(300.0).unwrap();
        assert!(build_table(7, &b, &t, 0.3, &PartialWaveOptions::default()).is_err());
    }

    #[test]
    fn i11_closed_special_values() {
        let a = 2e-35f64;
        let iso = PolarizabilityTensor::diagonal(a, a, a).unwrap();
        let eps0 = crate::constants::EPSILON_0;
        let k = 3.0e5f64;
        let want = k.powi(4) * 3.0 * a * a / (9.0 * eps0 * eps0);
        assert!((i11_closed(0.0, k, &iso).unwrap() / want - 1.0).abs() < 1e-15);
        let t = PolarizabilityTensor::diagonal(a, a, 0.5 * a).unwrap();
        assert_eq!(i11_closed(FRAC_PI_2, k, &t).unwrap(), i11_closed(0.0, k, &t).unwrap());
    }

    #[test]
    fn i11_matches_closed_form_small_grid() {
        let t = tensor();
        let k = 1.3e5;
        let got = i_llprime(1, 1, 0.7, k, &t, 6, PolarizationConvention::DirectionContracted).unwrap();
        let want = i11_closed(0.7, k, &t).unwrap();
        assert!((got.value / want - 1.0).abs() < 1e-12, "{} vs {}", got.value, want);
        assert!(got.converged);
    }

    #[test]
    fn transverse_kernels_have_no_odd_channels() {
        // (I - k k^T) is even in k, so its projection on odd Legendre degrees vanishes
        let t = tensor();
        let scale = i11_closed(0.0, 1.0, &t).unwrap();
        let v = i_llprime(1, 1, 0.7, 1.0, &t, 6, PolarizationConvention::AvgAvg).unwrap();
        assert!(v.value.abs() < 1e-12 * scale);
        let even = i_llprime(2, 2, 0.7, 1.0, &t, 8, PolarizationConvention::AvgAvg).unwrap();
        assert!(even.value.abs() > 1e-3 * scale);
    }

    #[test]
    fn separable_and_quadrature_radial_agree() {
        let b = ThermalBath::new(300.0).unwrap();
        let t = tensor();
        let sep = lambda_llprime(1, 1, &b, &t, 1.0, &PartialWaveOptions::default()).unwrap();
        let opts = PartialWaveOptions { k_integration: KIntegration::Quadrature, ..Default::default() };
        let quad = lambda_llprime(1, 1, &b, &t, 1.0, &opts).unwrap();
        assert!((sep.lambda / quad.lambda - 1.0).abs() < 1e-10);
    }
}
