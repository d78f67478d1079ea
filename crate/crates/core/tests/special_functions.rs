use std::f64::consts::PI;

use num_complex::Complex;
use proptest::prelude::*;
use rotodec::geometry::rotate_direction_z;
use rotodec::quadrature::{build_sphere_grid, integrate_s2};
use rotodec::special::{
    addition_theorem_lhs, assoc_legendre, factorial, legendre_p, riemann_zeta_int, spherical_harmonic,
};
use rotodec::{SphericalHarmonicIndex, UnitDirection};

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Power-series coefficients of P_l, lowest degree first.
fn legendre_coefficients(l: u32) -> Vec<f64> {
    let mut c = vec![0.0; l as usize + 1];
    for k in 0..=l / 2 {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        c[(l - 2 * k) as usize] = sign * binomial(l, k) * binomial(2 * l - 2 * k, l) / 2f64.powi(l as i32);
    }
    c
}

fn polyval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, a| acc * x + a)
}

fn derivative(c: &[f64]) -> Vec<f64> {
    c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect()
}

#[test]
fn legendre_matches_explicit_polynomials() {
    for l in 0..=10 {
        let c = legendre_coefficients(l);
        for i in 0..=40 {
            let x = -1.0 + i as f64 / 20.0;
            let got = legendre_p(l, x).unwrap();
            assert!((got - polyval(&c, x)).abs() < 1e-12, "l={l} x={x}");
        }
    }
}

#[test]
fn associated_legendre_is_derivative_of_polynomial() {
    for l in 0..=8u32 {
        let mut d = legendre_coefficients(l);
        for m in 0..=l {
            for i in 0..=20 {
                let x = -0.95 + 0.095 * i as f64;
                let expect = (1.0 - x * x).powf(m as f64 / 2.0) * polyval(&d, x);
                let got = assoc_legendre(l, m, x).unwrap();
                assert!((got - expect).abs() <= 1e-11 * expect.abs().max(1.0), "l={l} m={m} x={x}");
            }
            d = derivative(&d);
        }
    }
}

#[test]
fn legendre_domain() {
    assert!(legendre_p(3, 1.0 + 1e-13).is_ok());
    assert!(legendre_p(3, 1.1).is_err());
    assert!(assoc_legendre(2, 3, 0.5).is_err());
    assert!(SphericalHarmonicIndex::new(2, 3).is_err());
    assert!(SphericalHarmonicIndex::new(2, -2).is_ok());
}

#[test]
fn low_order_harmonics_closed_forms() {
    let d = UnitDirection::new(0.7, 1.9).unwrap();
    let (st, ct) = (0.7f64.sin(), 0.7f64.cos());
    let y = |l, m| spherical_harmonic(SphericalHarmonicIndex::new(l, m).unwrap(), &d);
    assert!((y(0, 0).re - 0.5 / PI.sqrt()).abs() < 1e-15);
    assert!((y(1, 0).re - (3.0 / (4.0 * PI)).sqrt() * ct).abs() < 1e-15);
    let y11 = -(3.0 / (8.0 * PI)).sqrt() * st * Complex::from_polar(1.0, 1.9);
    assert!((y(1, 1) - y11).norm() < 1e-15);
    let y22 = 0.25 * (15.0 / (2.0 * PI)).sqrt() * st * st * Complex::from_polar(1.0, 3.8);
    assert!((y(2, 2) - y22).norm() < 1e-15);
}

#[test]
fn orthonormality_up_to_l6() {
    let grid = build_sphere_grid::<f64>(12).unwrap();
    let idx: Vec<_> = SphericalHarmonicIndex::all_up_to(6).collect();
    assert_eq!(idx.len(), 49);
    for a in &idx {
        for b in &idx {
            let s: Complex<f64> = integrate_s2(&grid, |n| {
                spherical_harmonic(*a, &n.direction) * spherical_harmonic(*b, &n.direction).conj()
            });
            let target = if a == b { 1.0 } else { 0.0 };
            assert!((s - target).norm() < 1e-12, "{a:?} {b:?} {s}");
        }
    }
}

#[test]
fn projection_recovers_band_limited_coefficients() {
    let grid = build_sphere_grid::<f64>(10).unwrap();
    let idx: Vec<_> = SphericalHarmonicIndex::all_up_to(4).collect();
    let coeffs: Vec<Complex<f64>> =
        (0..idx.len()).map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 0.91).cos())).collect();
    let f = |d: &UnitDirection| -> Complex<f64> {
        idx.iter().zip(&coeffs).map(|(i, c)| c * spherical_harmonic(*i, d)).sum()
    };
    for (i, c) in idx.iter().zip(&coeffs) {
        let got: Complex<f64> =
            integrate_s2(&grid, |n| f(&n.direction) * spherical_harmonic(*i, &n.direction).conj());
        assert!((got - c).norm() < 1e-12);
    }
}

#[test]
fn zeta_and_factorial_values() {
    let z = |s| riemann_zeta_int::<f64>(s).unwrap();
    assert!((z(2) / (PI.powi(2) / 6.0) - 1.0).abs() < 1e-15);
    assert!((z(4) / (PI.powi(4) / 90.0) - 1.0).abs() < 1e-15);
    assert!((z(6) / (PI.powi(6) / 945.0) - 1.0).abs() < 1e-15);
    assert!((z(8) / (PI.powi(8) / 9450.0) - 1.0).abs() < 1e-15);
    assert!((z(3) - 1.2020569031595942).abs() < 1e-15);
    assert!((z(7) - 1.0083492773819228).abs() < 1e-15);
    assert!(riemann_zeta_int::<f64>(1).is_err());
    assert_eq!(factorial::<f64>(6).unwrap(), 720.0);
    assert_eq!(factorial::<f64>(20).unwrap(), 2432902008176640000.0);
    assert!(factorial::<f64>(171).is_err());
}

fn direction() -> impl Strategy<Value = UnitDirection> {
    (-1.0f64..1.0, 0.0f64..2.0 * PI).prop_map(|(z, phi)| UnitDirection::new(z.acos(), phi).unwrap())
}

proptest! {
    #[test]
    fn rotation_about_z_is_a_phase(l in 0u32..=8, mfrac in 0.0f64..1.0, d in direction(), a in -PI..PI) {
        let m = ((2 * l + 1) as f64 * mfrac).floor() as i32 - l as i32;
        let m = m.clamp(-(l as i32), l as i32);
        let idx = SphericalHarmonicIndex::new(l, m).unwrap();
        let lhs = spherical_harmonic(idx, &rotate_direction_z(&d, a));
        let rhs = spherical_harmonic(idx, &d) * Complex::from_polar(1.0, -(m as f64) * a);
        prop_assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn negative_m_reflection(l in 0u32..=8, d in direction()) {
        for m in 0..=l as i32 {
            let pos = spherical_harmonic(SphericalHarmonicIndex::new(l, m).unwrap(), &d);
            let neg = spherical_harmonic(SphericalHarmonicIndex::new(l, -m).unwrap(), &d);
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            prop_assert!((neg - pos.conj() * sign).norm() < 1e-14);
        }
    }

    #[test]
    fn addition_theorem(l in 0u32..=10, d1 in direction(), d2 in direction()) {
        let cos = d1.to_cartesian().dot(&d2.to_cartesian()).clamp(-1.0, 1.0);
        let rhs = (2 * l + 1) as f64 / (4.0 * PI) * polyval(&legendre_coefficients(l), cos);
        prop_assert!((addition_theorem_lhs(l, &d1, &d2) - rhs).abs() < 1e-12);
    }

    #[test]
    fn legendre_bounded(l in 0u32..=30, x in -1.0f64..=1.0) {
        prop_assert!(legendre_p(l, x).unwrap().abs() <= 1.0 + 1e-12);
    }
}
