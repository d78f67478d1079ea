use std::f64::consts::{FRAC_PI_2, PI};

use rotodec::partial_waves::{
    build_table, i11_closed, i_llprime, lambda_llprime, KIntegration, PartialWaveOptions, MAX_PARTIAL_WAVE_L,
};
use rotodec::rates::lambda_closed_form;
use rotodec::tensor::{polarizability_from_volume, rotate_polarizability};
use rotodec::{PolarizabilityTensor, PolarizationConvention, ThermalBath};

fn tensor() -> PolarizabilityTensor {
    polarizability_from_volume([1.2e-25, 0.4e-25, 0.7e-25]).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

#[test]
fn contracted_channels_are_confined_to_l1() {
    let bath = ThermalBath::new(300.0).unwrap();
    let a = tensor();
    for w in [0.4, FRAC_PI_2, 2.5] {
        let t = build_table(3, &bath, &a, w, &PartialWaveOptions::default()).unwrap();
        assert!(t.converged);
        let l11 = t.entry(1, 1).unwrap().lambda;
        let closed = lambda_closed_form(&bath, &a, w).unwrap().lambda;
        assert!(rel(l11, closed) < 1e-12);
        for e in &t.entries {
            if (e.l, e.lp) != (1, 1) {
                assert!(e.lambda.abs() < 1e-12 * l11, "({}, {})", e.l, e.lp);
            }
        }
        assert!(rel(t.total, closed) < 1e-12);
        let sums = t.partial_sum_ratios();
        assert!(sums[0].unwrap().abs() < 1e-12);
        assert!((sums[3].unwrap() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn i11_matches_closed_form() {
    let a = tensor();
    let k = 1.3e5;
    for w in [0.0, PI / 6.0, PI / 4.0, PI / 3.0, FRAC_PI_2, 2.0] {
        let num = i_llprime(1, 1, w, k, &a, 6, PolarizationConvention::DirectionContracted).unwrap();
        assert!(num.converged);
        assert!(rel(num.value, i11_closed(w, k, &a).unwrap()) < 1e-12, "w={w}");
    }
}

#[test]
fn transverse_kernel_lives_in_even_channels() {
    // projector kernels are quadratic and even in every direction, so only
    // l, l' in {0, 2} appear and the table stops changing beyond l_max = 2
    let bath = ThermalBath::new(300.0).unwrap();
    let a = tensor();
    let opts = PartialWaveOptions { convention: PolarizationConvention::AvgAvg, ..PartialWaveOptions::default() };
    let t3 = build_table(3, &bath, &a, 1.1, &opts).unwrap();
    let t2 = build_table(2, &bath, &a, 1.1, &opts).unwrap();
    let closed = lambda_closed_form(&bath, &a, 1.1).unwrap().lambda;
    for e in &t3.entries {
        let even = e.l % 2 == 0 && e.lp % 2 == 0 && e.l <= 2 && e.lp <= 2;
        if !even {
            assert!(e.lambda.abs() < 1e-12 * closed, "({}, {})", e.l, e.lp);
        }
    }
    assert!(t3.entry(0, 2).unwrap().lambda.abs() > 1e-3 * closed);
    assert!(rel(t3.total, t2.total) < 1e-12);
}

#[test]
fn channel_symmetry_and_angle_parity() {
    // pi-periodicity holds for the contracted kernel only; the projector
    // kernel does not commute with R_z(pi) across distinct directions
    let a = rotate_polarizability(&tensor(), 0.3);
    let k = 2e5;
    for conv in [PolarizationConvention::AvgAvg, PolarizationConvention::DirectionContracted] {
        for (l, lp) in [(0, 2), (1, 1), (1, 2)] {
            {
                let w = 1.9;
                let i = |l, lp, w| i_llprime(l, lp, w, k, &a, 8, conv).unwrap().value;
                let base = i(l, lp, w);
                let scale = a.matrix().frobenius_norm_sqr() * k.powi(4) / (9.0 * 8.8541878188e-12f64.powi(2));
                assert!((i(lp, l, w) - base).abs() < 1e-12 * scale, "{conv} ({l},{lp}) exchange");
                assert!((i(l, lp, -w) - base).abs() < 1e-12 * scale, "{conv} ({l},{lp}) even");
                if conv == PolarizationConvention::DirectionContracted {
                    assert!((i(l, lp, w + PI) - base).abs() < 1e-12 * scale, "({l},{lp}) period");
                }
            }
        }
    }
}

#[test]
fn fused_sweep_matches_single_channels_bitwise() {
    let bath = ThermalBath::new(77.0).unwrap();
    let a = tensor();
    let opts = PartialWaveOptions { grid_order: Some(8), ..PartialWaveOptions::default() };
    let table = build_table(2, &bath, &a, 0.9, &opts).unwrap();
    for e in &table.entries {
        let single = lambda_llprime(e.l, e.lp, &bath, &a, 0.9, &opts).unwrap();
        assert_eq!(single.lambda.to_bits(), e.lambda.to_bits(), "({}, {})", e.l, e.lp);
    }
}

#[test]
fn separable_and_quadrature_radial_integrals_agree() {
    let bath = ThermalBath::new(300.0).unwrap();
    let a = tensor();
    let sep = lambda_llprime(1, 1, &bath, &a, 1.0, &PartialWaveOptions::default()).unwrap();
    let quad = PartialWaveOptions { k_integration: KIntegration::Quadrature, ..PartialWaveOptions::default() };
    let q = lambda_llprime(1, 1, &bath, &a, 1.0, &quad).unwrap();
    assert!(rel(sep.lambda, q.lambda) < 1e-10);
}

#[test]
fn diagonal_channels_are_non_negative() {
    let bath = ThermalBath::new(300.0).unwrap();
    let a = tensor();
    for conv in PolarizationConvention::ALL {
        let opts = PartialWaveOptions { convention: conv, ..PartialWaveOptions::default() };
        let t = build_table(2, &bath, &a, 0.7, &opts).unwrap();
        let scale = lambda_closed_form(&bath, &a, 0.7).unwrap().lambda;
        for l in 0..=2 {
            assert!(t.entry(l, l).unwrap().lambda >= -1e-12 * scale, "{conv} l={l}");
        }
        assert!(t.total > 0.0);
    }
}

#[test]
fn guards() {
    let bath = ThermalBath::new(300.0).unwrap();
    let a = tensor();
    let opts = PartialWaveOptions::default();
    assert!(build_table(MAX_PARTIAL_WAVE_L + 1, &bath, &a, 1.0, &opts).is_err());
    let coarse = PartialWaveOptions { grid_order: Some(9), ..opts };
    assert!(build_table(3, &bath, &a, 1.0, &coarse).is_err());
    assert!(i_llprime(1, 1, 1.0, -1.0, &a, 6, PolarizationConvention::DirectionContracted).is_err());
    assert!(i_llprime(2, 1, 1.0, 1.0, &a, 6, PolarizationConvention::DirectionContracted).is_err());
    assert!(i11_closed(1.0, 1.0, &rotate_polarizability(&a, 0.2)).is_err());
}
