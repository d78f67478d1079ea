//! Legendre functions, spherical harmonics, factorials and integer zeta values.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::geometry::UnitDirection;
use crate::scalar::{from_usize, lit, Real};

/// Degree and order `(l, m)` of a spherical harmonic, `|m| <= l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SphericalHarmonicIndex {
    l: u32,
    m: i32,
}

impl SphericalHarmonicIndex {
    pub fn new(l: u32, m: i32) -> Result<Self> {
        if m.unsigned_abs() > l {
            return Err(Error::Index(format!("|m| = {} exceeds l = {l}", m.unsigned_abs())));
        }
        Ok(Self { l, m })
    }

    pub fn l(&self) -> u32 {
        self.l
    }

    pub fn m(&self) -> i32 {
        self.m
    }

    /// All indices with degree up to `l_max`, ordered by `l` then `m`.
    pub fn all_up_to(l_max: u32) -> impl Iterator<Item = Self> {
        (0..=l_max).flat_map(|l| (-(l as i32)..=l as i32).map(move |m| Self { l, m }))
    }
}

fn check_unit_interval<T: Real>(function: &'static str, x: T) -> Result<T> {
    let slack = lit::<T>(1e-12);
    if x.is_nan() || x.abs() > T::one() + slack {
        return Err(Error::Domain { function, value: x.to_f64().unwrap_or(f64::NAN) });
    }
    Ok(x.max(-T::one()).min(T::one()))
}

/// Legendre polynomial `P_l(x)` by the three-term recurrence.
pub fn legendre_p<T: Real>(l: u32, x: T) -> Result<T> {
    let x = check_unit_interval("legendre_p", x)?;
    Ok(legendre_unchecked(l, x))
}

pub(crate) fn legendre_unchecked<T: Real>(l: u32, x: T) -> T {
    let mut p_prev = T::one();
    if l == 0 {
        return p_prev;
    }
    let mut p = x;
    for n in 1..l as usize {
        let nf = from_usize::<T>(n);
        let next = ((nf + nf + T::one()) * x * p - nf * p_prev) / (nf + T::one());
        p_prev = p;
        p = next;
    }
    p
}

/// Fills `out[l] = P_l(x)` for `l = 0..out.len()`. `x` must already be in `[-1, 1]`.
pub(crate) fn legendre_all<T: Real>(x: T, out: &mut [T]) {
    let Some(first) = out.first_mut() else { return };
    *first = T::one();
    if out.len() == 1 {
        return;
    }
    out[1] = x;
    for n in 1..out.len() - 1 {
        let nf = from_usize::<T>(n);
        out[n + 1] = ((nf + nf + T::one()) * x * out[n] - nf * out[n - 1]) / (nf + T::one());
    }
}

/// Associated Legendre function `P_l^m(x) = (1-x^2)^(m/2) d^m/dx^m P_l(x)` for
/// `0 <= m <= l`, without the Condon-Shortley phase.
pub fn assoc_legendre<T: Real>(l: u32, m: u32, x: T) -> Result<T> {
    if m > l {
        return Err(Error::Index(format!("associated Legendre order m = {m} exceeds l = {l}")));
    }
    let x = check_unit_interval("assoc_legendre", x)?;
    Ok(assoc_legendre_unchecked(l, m, x))
}

fn assoc_legendre_unchecked<T: Real>(l: u32, m: u32, x: T) -> T {
    let one = T::one();
    let sin_t = ((one - x) * (one + x)).max(T::zero()).sqrt();
    // P_m^m = (2m-1)!! sin^m
    let mut pmm = one;
    for i in 1..=m as usize {
        pmm = pmm * from_usize::<T>(2 * i - 1) * sin_t;
    }
    if l == m {
        return pmm;
    }
    let mf = from_usize::<T>(m as usize);
    let mut p_prev = pmm;
    let mut p = x * (mf + mf + one) * pmm;
    for n in (m + 2)..=l {
        let nf = from_usize::<T>(n as usize);
        let next = (x * (nf + nf - one) * p - (nf + mf - one) * p_prev) / (nf - mf);
        p_prev = p;
        p = next;
    }
    p
}

/// Orthonormal spherical harmonic
/// `Y_lm = (-1)^m sqrt((2l+1)(l-m)! / (4 pi (l+m)!)) P_l^m(cos theta) e^{i m phi}`,
/// extended to negative `m` by `Y_{l,-m} = (-1)^m conj(Y_lm)`.
pub fn spherical_harmonic<T: Real>(idx: SphericalHarmonicIndex, d: &UnitDirection<T>) -> Complex<T> {
    let l = idx.l;
    let m = idx.m.unsigned_abs();
    // (l-m)!/(l+m)! as a running product, no overflow for large l
    let mut ratio = T::one();
    for k in (l - m + 1)..=(l + m) {
        ratio = ratio / from_usize::<T>(k as usize);
    }
    let two_l1 = from_usize::<T>(2 * l as usize + 1);
    let norm = (two_l1 * ratio / (lit::<T>(4.0) * T::PI())).sqrt();
    let plm = assoc_legendre_unchecked(l, m, d.theta().cos().max(-T::one()).min(T::one()));
    let sign = if m % 2 == 1 { -T::one() } else { T::one() };
    let mag = sign * norm * plm;
    let arg = from_usize::<T>(m as usize) * d.phi();
    let y = Complex::from_polar(mag, arg);
    if idx.m >= 0 {
        y
    } else {
        y.conj() * sign
    }
}

/// `sum_m Y_lm(d1) conj(Y_lm(d2))`, which the addition theorem reduces to
/// `(2l+1)/(4 pi) P_l(d1 . d2)`. Returns the real part; the imaginary part
/// cancels to round-off.
pub fn addition_theorem_lhs<T: Real>(l: u32, d1: &UnitDirection<T>, d2: &UnitDirection<T>) -> T {
    addition_theorem_sum(l, d1, d2).re
}

pub(crate) fn addition_theorem_sum<T: Real>(
    l: u32,
    d1: &UnitDirection<T>,
    d2: &UnitDirection<T>,
) -> Complex<T> {
    let li = l as i32;
    (-li..=li)
        .map(|m| {
            let idx = SphericalHarmonicIndex { l, m };
            spherical_harmonic(idx, d1) * spherical_harmonic(idx, d2).conj()
        })
        .fold(Complex::new(T::zero(), T::zero()), |a, b| a + b)
}

/// `n!` as a float; exact for `n <= 22` in `f64`.
pub fn factorial<T: Real>(n: u32) -> Result<T> {
    if n > 170 {
        return Err(Error::Overflow(n));
    }
    let mut acc = T::one();
    for k in 2..=n as usize {
        acc = acc * from_usize::<T>(k);
    }
    if !acc.is_finite() {
        return Err(Error::Overflow(n));
    }
    Ok(acc)
}

const ZETA_TERMS: usize = 1_000_000;

/// Riemann zeta at integer `s >= 2`: direct sum of the first 10^6 terms (smallest
/// first) plus the Euler-Maclaurin tail `N^{1-s}/(s-1) - N^{-s}/2 + s N^{-s-1}/12`.
pub fn riemann_zeta_int<T: Real>(s: u32) -> Result<T> {
    if s < 2 {
        return Err(Error::Domain { function: "riemann_zeta_int", value: s as f64 });
    }
    let si = s as i32;
    let mut sum = T::zero();
    for k in (1..=ZETA_TERMS).rev() {
        sum = sum + from_usize::<T>(k).recip().powi(si);
    }
    let n = from_usize::<T>(ZETA_TERMS);
    let sf = from_usize::<T>(s as usize);
    let tail = n.powi(1 - si) / (sf - T::one()) - n.powi(-si) / lit(2.0)
        + sf * n.powi(-si - 1) / lit(12.0);
    Ok(sum + tail)
}
