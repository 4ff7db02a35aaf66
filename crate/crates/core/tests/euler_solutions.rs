use num_complex::Complex64;
use proptest::prelude::*;
use sle_core::contour::{integrate_product_cycle, pochhammer_loop_with_height, ProductCycle};
use sle_core::euler::*;
use sle_core::holonomy::{verify_annihilation, verify_annihilation_default};
use sle_core::pairings::NonCrossingPairing;
use sle_core::quad::tanh_sinh_real;
use sle_core::specialfn::chordal_crossing;
use std::f64::consts::PI;

fn pairing(p: &[(usize, usize)]) -> NonCrossingPairing {
    NonCrossingPairing::from_pairs(p).unwrap()
}

fn cfg(x: &[f64], kappa: f64) -> Configuration {
    Configuration::new(x.to_vec(), kappa).unwrap()
}

/// |Pochhammer integral| at n = 2 around (x₁, x₂) from a real integral over
/// the segment: |1−e^{2πip}||1−e^{2πiq}| ∫ |φ| with p = q = −4/κ.
fn pochhammer_oracle(x: &[f64], kappa: f64) -> f64 {
    let e = -4.0 / kappa;
    let last = 12.0 / kappa - 2.0;
    let (v, _) = tanh_sinh_real(
        |t, da, db| da.powf(e) * db.powf(e) * (x[2] - t).powf(e) * (x[3] - t).powf(last),
        x[0],
        x[1],
        1e-14,
    );
    let s = (2.0 * (PI * e).sin()).abs();
    s * s * v * cfg(x, kappa).prefactor()
}

#[test]
fn phi_n_reference_value() {
    let c = cfg(&[0.0, 1.0, 2.0, 4.0], 6.0);
    let v = phi_n(&c, &[Complex64::new(1.5, 0.0)]).unwrap();
    let want = Complex64::new(-1.211_413_728_554_759_8, -2.098_230_126_843_296_4);
    assert!((v - want).norm() < 1e-13 * want.norm(), "{v}");
}

#[test]
fn two_pair_integral_matches_segment_oracle() {
    for (x, kappa) in [([0.0, 1.0, 2.0, 4.0], 5.0), ([0.0, 0.4, 1.1, 3.0], 6.5), ([-1.0, 2.0, 2.5, 3.0], 4.5)] {
        let v = euler_solution(&cfg(&x, kappa), &CycleSpec::pairing_product(pairing(&[(1, 2), (3, 4)])), 1e-12).unwrap();
        let o = pochhammer_oracle(&x, kappa);
        assert!((v.norm() - o).abs() < 1e-9 * o, "κ={kappa}: {} vs {o}", v.norm());
    }
    let v = euler_solution(&cfg(&[0.0, 1.0, 2.0, 4.0], 5.0), &CycleSpec::pairing_product(pairing(&[(1, 2), (3, 4)])), 1e-12).unwrap();
    assert!((v.norm() - 11.484_685_832_126_241).abs() < 1e-9 * 11.5, "{}", v.norm());
}

#[test]
fn three_pair_loops_are_deformation_invariant() {
    let x = [0.0, 0.7, 1.5, 2.6, 3.1, 4.0];
    let c = cfg(&x, 5.0);
    let phi = master_integrand(&c);
    let reference = euler_solution(&c, &CycleSpec::pairing_product(pairing(&[(1, 2), (3, 4), (5, 6)])), 1e-12).unwrap();
    for (clear, h) in [(0.1, 0.15), (0.05, 0.3), (0.12, 0.5)] {
        let cycle = ProductCycle {
            contours: vec![
                pochhammer_loop_with_height(x[0], x[1], clear, h).unwrap(),
                pochhammer_loop_with_height(x[2], x[3], clear, 1.3 * h).unwrap(),
            ],
        };
        let v = integrate_product_cycle(&phi, &cycle, 1e-12).unwrap();
        assert!((v - reference).norm() < 1e-8 * reference.norm(), "{v} vs {reference}");
    }
}

#[test]
fn loop_order_changes_only_the_phase() {
    let c = cfg(&[0.0, 1.0, 1.5, 2.5, 3.0, 4.2], 5.0);
    let p = pairing(&[(1, 2), (3, 4), (5, 6)]);
    let a = euler_solution(&c, &CycleSpec::PairingProduct { pairing: p.clone(), loop_order: vec![0, 1] }, 1e-12).unwrap();
    let b = euler_solution(&c, &CycleSpec::PairingProduct { pairing: p, loop_order: vec![1, 0] }, 1e-12).unwrap();
    assert!((a.norm() - b.norm()).abs() < 1e-9 * a.norm());
}

#[test]
fn nested_pairing_loops() {
    let c = cfg(&[0.0, 0.5, 1.0, 2.0, 2.5, 4.0], 5.0);
    let v = euler_solution(&c, &CycleSpec::pairing_product(pairing(&[(1, 4), (2, 3), (5, 6)])), 1e-12).unwrap();
    let w = euler_solution(&c, &CycleSpec::Loops(vec![(0, 3), (1, 2)]), 1e-12).unwrap();
    assert!(v.norm() > 0.0 && (v - w).norm() < 1e-12 * v.norm());
}

#[test]
fn bad_cycles_rejected() {
    let c = cfg(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0], 5.0);
    assert!(build_cycle(&c, &CycleSpec::Loops(vec![(0, 2), (1, 3)])).is_err());
    assert!(build_cycle(&c, &CycleSpec::Loops(vec![(0, 1)])).is_err());
    assert!(build_cycle(&c, &CycleSpec::Loops(vec![(0, 1), (1, 2)])).is_err());
    let p = pairing(&[(1, 2), (3, 4), (5, 6)]);
    assert!(build_cycle(&c, &CycleSpec::PairingProduct { pairing: p, loop_order: vec![0, 0] }).is_err());
    assert!(build_cycle(&cfg(&[0.0, 1.0, 2.0, 3.0], 13.0), &CycleSpec::Nested).is_err());
}

#[test]
fn c_kappa_dual_forms_agree() {
    for kappa in [0.7, 1.3, 2.2, 2.5, 3.5, 4.5, 5.0, 5.5, 6.0, 7.0] {
        let a = c_kappa(kappa).unwrap();
        let b = c_kappa_sine_form(kappa).unwrap();
        assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0), "κ={kappa}: {a} vs {b}");
    }
}

#[test]
fn collapse_limit_two_pairs() {
    let r = collapse_limit_check(&cfg(&[0.0, 0.5, 1.0, 2.0], 3.0), &pairing(&[(1, 2), (3, 4)]), 1, 1e-12).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn collapse_limit_three_pairs() {
    let r = collapse_limit_check(&cfg(&[0.0, 0.5, 1.0, 2.0, 2.6, 3.5], 2.5), &pairing(&[(1, 2), (3, 4), (5, 6)]), 3, 1e-12).unwrap();
    assert!(r.pass, "{r:?}");
}

#[test]
fn kappa_two_nested_matches_determinant() {
    let det2 = |x: &[f64]| 1.0 / ((x[0] - x[3]).powi(2) * (x[1] - x[2]).powi(2)) - 1.0 / ((x[0] - x[2]).powi(2) * (x[1] - x[3]).powi(2));
    for x in [[0.0, 1.0, 2.0, 4.0], [-1.0, 0.2, 0.3, 5.0], [0.0, 2.0, 3.0, 3.5]] {
        let v = euler_solution(&cfg(&x, 2.0), &CycleSpec::Nested, 1e-12).unwrap();
        let want = Complex64::new(0.0, -4.0 * PI) * det2(&x);
        assert!((v - want).norm() < 1e-8 * want.norm(), "{v} vs {want}");
    }
}

#[test]
fn kappa_two_nested_ratio_constant_three_pairs() {
    // det((x_i − x_{2n+1−j})^{-2}) for the nested pairing.
    let det = |x: &[f64]| {
        let m = nalgebra::Matrix3::from_fn(|i, j| (x[i] - x[5 - j]).powi(-2));
        m.determinant()
    };
    let mut ratios = Vec::new();
    for x in [[0.0, 1.0, 2.0, 3.0, 4.5, 6.0], [0.0, 0.5, 2.0, 2.5, 3.0, 5.0], [-2.0, 0.0, 0.3, 1.0, 3.0, 3.4]] {
        let v = euler_solution(&cfg(&x, 2.0), &CycleSpec::Nested, 1e-12).unwrap();
        ratios.push(v / det(&x));
    }
    for r in &ratios[1..] {
        assert!((r - ratios[0]).norm() < 1e-6 * ratios[0].norm(), "{ratios:?}");
    }
}

#[test]
fn outer_loop_gives_chordal_crossing() {
    for kappa in [2.5, 5.0] {
        let c = c_kappa(kappa).unwrap().abs();
        for r in [0.2, 0.5, 0.8] {
            // x = (0, 1 − r, 1, ∞) mapped to a finite point: cross-ratio (x3−x2)(x4−x1)/((x3−x1)(x4−x2)) = r.
            let x4 = 3.0;
            let x2 = {
                // Solve (1−x2)x4 / (x4 − x2) = r.
                x4 * (1.0 - r) / (x4 - r)
            };
            let x = [0.0, x2, 1.0, x4];
            let v = euler_solution(&cfg(&x, kappa), &CycleSpec::Loops(vec![(0, 3)]), 1e-12).unwrap();
            let pref = ((x[1] - x[0]) * (x[3] - x[2])).powf(1.0 - 6.0 / kappa);
            let ratio = v.norm() / (pref * chordal_crossing(r, kappa).unwrap());
            assert!((ratio - c).abs() < 1e-8 * c, "κ={kappa} r={r}: {ratio} vs {c}");
        }
    }
}

#[test]
fn psi_single_pair_is_one() {
    let r = psi_nonintersection(&cfg(&[0.3, 1.7], 2.5), &pairing(&[(1, 2)]), 1e-12).unwrap();
    assert!((r.psi - 1.0).abs() < 1e-14);
}

#[test]
fn psi_widely_separated_pairs_near_one() {
    let r = psi_nonintersection(&cfg(&[0.0, 1.0, 100.0, 101.0], 2.5), &pairing(&[(1, 2), (3, 4)]), 1e-12).unwrap();
    assert!((r.psi - 1.0).abs() < 1e-3, "{}", r.psi);
}

#[test]
fn psi_formula_leaves_unit_interval_near_interior_collision() {
    // The pairing-product cycle carries the (x₃−x₂)^{1−6/κ} component.
    let r = psi_nonintersection(&cfg(&[0.0, 1.95, 2.0, 3.0], 2.5), &pairing(&[(1, 2), (3, 4)]), 1e-12).unwrap();
    assert!(r.psi > 10.0, "{}", r.psi);
    assert!(psi_nonintersection(&cfg(&[0.0, 1.0, 2.0, 3.0], 3.0), &pairing(&[(1, 2), (3, 4)]), 1e-12).is_err());
}

#[test]
fn outer_loop_vanishes_as_pairs_collide() {
    let kappa = 2.5;
    let c = c_kappa(kappa).unwrap().abs();
    let mut last = f64::INFINITY;
    for x2 in [1.9, 1.99, 1.999] {
        let x = [0.0, x2, 2.0, 3.0];
        let v = euler_solution(&cfg(&x, kappa), &CycleSpec::Loops(vec![(0, 3)]), 1e-12).unwrap();
        let psi = v.norm() / c * ((x[1] - x[0]) * (x[3] - x[2])).powf(6.0 / kappa - 1.0);
        assert!(psi < last && (0.0..1.0).contains(&psi));
        last = psi;
    }
    assert!(last < 0.01, "{last}");
}

#[test]
fn lemma_identities_two_and_three_pairs() {
    let steps = [1e-2, 1e-3];
    let cases: [(&[f64], &[Complex64], f64); 2] = [
        (&[0.0, 0.8, 1.7, 3.0], &[Complex64::new(1.1, 0.6)], 3.3),
        (&[-0.5, 0.4, 1.0, 2.2, 2.9, 4.0], &[Complex64::new(0.7, 0.9), Complex64::new(2.5, 0.4)], 5.5),
    ];
    for (x, u, kappa) in cases {
        let c = cfg(x, kappa);
        for k in 1..=x.len() {
            let r = lemma_check(&c, u, k, &steps).unwrap();
            assert!(r.pass, "k={k}: {r:?}");
        }
    }
}

#[test]
fn frozen_solution_annihilated_two_pairs() {
    let x = [0.0, 0.9, 2.0, 3.3];
    for kappa in [2.5, 3.0, 5.0] {
        let c = cfg(&x, kappa);
        let f = FrozenEulerSolution::new(&c, &CycleSpec::pairing_product(pairing(&[(1, 2), (3, 4)])), 1e-13).unwrap();
        let rep = verify_annihilation_default(&|y: &[f64]| f.eval(y), &x, kappa).unwrap();
        assert!(rep.pass, "κ={kappa}: {rep:?}");
    }
}

#[test]
fn non_solution_fails_annihilation() {
    let x = [0.0, 0.9, 2.0, 3.3];
    let f = |y: &[f64]| -> Result<Complex64, String> { Ok(Complex64::new((y[1] - y[0]).powf(0.3) * y[3].exp(), 0.0)) };
    let steps = [1e-2, 1e-3];
    let rep = verify_annihilation(&f, &x, 3.0, &steps).unwrap();
    assert!(!rep.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn covariance_under_affine_maps(
        gaps in proptest::collection::vec(0.3f64..2.0, 3),
        kappa in 4.2f64..7.5,
        lambda in 0.3f64..3.0,
        shift in -5.0f64..5.0,
    ) {
        prop_assume!((8.0 / kappa - (8.0 / kappa).round()).abs() > 1e-3);
        prop_assume!((12.0 / kappa - (12.0 / kappa).round()).abs() > 1e-3);
        let mut x = vec![0.0];
        for g in &gaps {
            x.push(x.last().unwrap() + g);
        }
        let y: Vec<f64> = x.iter().map(|v| lambda * v + shift).collect();
        let p = pairing(&[(1, 2), (3, 4)]);
        let a = euler_solution(&cfg(&x, kappa), &CycleSpec::pairing_product(p.clone()), 1e-12).unwrap();
        let b = euler_solution(&cfg(&y, kappa), &CycleSpec::pairing_product(p), 1e-12).unwrap();
        let want = a.norm() * lambda.powf(2.0 * (1.0 - 6.0 / kappa));
        prop_assert!((b.norm() - want).abs() < 1e-9 * want);
    }
}
