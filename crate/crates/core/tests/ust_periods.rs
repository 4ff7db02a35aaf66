use num_complex::Complex64;
use sle_core::contour::{integrate_product_cycle, segment_loop, LinearFactor, ProductCycle, ProductIntegrand};
use sle_core::holonomy::verify_annihilation_default;
use sle_core::quad::tanh_sinh_real;
use sle_core::ust::*;

/// 2∫_{x₁}^{x₂} ds/√|∏(s−x_k)|.
fn segment_oracle(x: &[f64]) -> f64 {
    let (v, _) = tanh_sinh_real(
        |s, da, db| {
            let rest: f64 = x[2..].iter().map(|&xk| (xk - s).abs()).product();
            1.0 / (da * db * rest).sqrt()
        },
        x[0],
        x[1],
        1e-14,
    );
    2.0 * v
}

#[test]
fn single_period_matches_segment_integral() {
    for x in [[0.0, 1.0, 2.0, 4.0], [-1.0, 0.5, 0.7, 3.0]] {
        let p = period_matrix(&x, PeriodBasis::Shifted).unwrap();
        let o = segment_oracle(&x);
        assert!((p.entries[0][0].norm() - o).abs() < 1e-10 * o, "{:?} vs {o}", p.entries);
    }
}

#[test]
fn bases_give_equal_determinants() {
    for x in [vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![-1.0, 0.5, 0.7, 2.0, 2.4, 6.0], vec![0.0, 0.5, 1.0, 2.0, 3.0, 3.5, 5.0, 7.0]] {
        let r = psi_ust(&x).unwrap();
        assert!((r.det_monomial - r.det_shifted).norm() < 1e-10 * r.det_shifted.norm(), "{r:?}");
        assert!(r.psi > 0.0);
    }
}

#[test]
fn scaling_of_entries() {
    let x = [0.0, 1.0, 2.0, 3.5, 4.0, 6.0];
    let lambda = 1.7;
    let y: Vec<f64> = x.iter().map(|v| lambda * v).collect();
    let p = period_matrix(&x, PeriodBasis::Shifted).unwrap();
    let q = period_matrix(&y, PeriodBasis::Shifted).unwrap();
    let n = 3;
    for i in 0..n - 1 {
        for j in 0..n - 1 {
            let want = p.entries[i][j] * lambda.powi(i as i32 + 1 - n as i32);
            assert!((q.entries[i][j] - want).norm() < 1e-10 * want.norm());
        }
    }
}

#[test]
fn periods_are_deformation_invariant() {
    let x = [0.0, 1.0, 2.0, 3.5, 4.0, 6.0];
    let p = period_matrix(&x, PeriodBasis::Shifted).unwrap();
    let c = |v: f64| Complex64::new(v, 0.0);
    for clear in [0.05, 0.1, 0.2] {
        let mut f: Vec<LinearFactor> = x.iter().map(|&xk| LinearFactor::point(c(xk), -0.5, false)).collect();
        f[0] = LinearFactor::point(c(x[0]), 0.5, false);
        let phi = ProductIntegrand { point_factors: vec![f], pair_factors: vec![], prefactor: c(1.0) };
        let v = integrate_product_cycle(&phi, &ProductCycle { contours: vec![segment_loop(x[2], x[3], clear).unwrap()] }, 1e-13).unwrap();
        assert!((v - p.entries[1][1]).norm() < 1e-11 * v.norm());
    }
}

#[test]
fn omega_recursion() {
    for x in [vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0, 0.5, 1.0, 2.0, 3.0, 3.5, 5.0, 7.0]] {
        let r = verify_omega_recursion(&x, default_step(&x)).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.residuals.len(), x.len() / 2 - 2);
    }
}

#[test]
fn drift_identity_and_companion_structure() {
    for x in [vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0], vec![0.0, 0.5, 1.0, 2.0, 3.0, 3.5, 5.0, 7.0]] {
        let r = verify_drift_identity(&x, default_step(&x)).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.companion_residual < 1e-5, "{r:?}");
    }
}

#[test]
fn psi_is_annihilated_at_kappa_eight() {
    let x = [0.0, 1.0, 2.2, 3.0, 4.1, 5.0];
    let frozen = FrozenPeriods::new(&x, PeriodBasis::Shifted, PERIOD_TOL).unwrap();
    let rep = verify_annihilation_default(&|y: &[f64]| frozen.psi_complex(y), &x, 8.0).unwrap();
    assert!(rep.pass, "{rep:?}");
}
