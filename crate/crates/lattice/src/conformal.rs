//! Boundary values of the conformal map from the unit square onto the upper
//! half-plane, for comparing lattice quantities with half-plane formulas.
//!
//! The inverse map is the Schwarz–Christoffel integral onto the rectangle
//! [−K, K] × [0, K′] with K′/K = 2, which needs modulus k = (√2 − 1)².
//! Boundary points then map to real values through sn.

use std::f64::consts::FRAC_PI_2;

/// Modulus making the Schwarz–Christoffel rectangle a 2:1 box.
pub fn square_modulus() -> f64 {
    (2f64.sqrt() - 1.0).powi(2)
}

fn agm_steps(k: f64) -> (Vec<f64>, Vec<f64>) {
    let (mut a, mut b, mut c) = (1.0f64, (1.0 - k * k).sqrt(), k);
    let (mut av, mut cv) = (vec![a], vec![c]);
    while c.abs() > 1e-17 * a && av.len() < 40 {
        let an = 0.5 * (a + b);
        c = 0.5 * (a - b);
        b = (a * b).sqrt();
        a = an;
        av.push(a);
        cv.push(c);
    }
    (av, cv)
}

/// Complete elliptic integral K(k).
pub fn elliptic_k(k: f64) -> f64 {
    let (a, _) = agm_steps(k);
    FRAC_PI_2 / a[a.len() - 1]
}

/// Jacobi sn(u, k) and dn(u, k) for real u by the descending Landen (AGM)
/// recursion on the amplitude.
pub fn jacobi_sn_dn(u: f64, k: f64) -> (f64, f64) {
    let (a, c) = agm_steps(k);
    let m = a.len() - 1;
    let mut phi = 2f64.powi(m as i32) * a[m] * u;
    for j in (1..=m).rev() {
        phi = 0.5 * (phi + (c[j] / a[j] * phi.sin()).asin());
    }
    let s = phi.sin();
    (s, (1.0 - k * k * s * s).sqrt())
}

/// Image on ℝ ∪ {∞} of the point at normalized arclength `s` (counterclockwise
/// from (0, 0)) on the boundary of the unit square. The corners go to ±1 and
/// ±1/k, the bottom midpoint to 0 and the top midpoint to ∞; the order along
/// the boundary is preserved.
pub fn square_boundary_to_real(s: f64) -> f64 {
    let k = square_modulus();
    let kp = (1.0 - k * k).sqrt();
    let big_k = elliptic_k(k);
    let side = 2.0 * big_k;
    let t = 4.0 * s.rem_euclid(1.0);
    match t as usize {
        0 => jacobi_sn_dn(side * t - big_k, k).0,
        1 => 1.0 / jacobi_sn_dn(side * (t - 1.0), kp).1,
        2 => 1.0 / (k * jacobi_sn_dn(big_k - side * (t - 2.0), k).0),
        _ => -1.0 / jacobi_sn_dn(side * (4.0 - t), kp).1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rectangle_is_square() {
        let k = square_modulus();
        let kp = (1.0 - k * k).sqrt();
        assert!((elliptic_k(kp) / elliptic_k(k) - 2.0).abs() < 1e-13);
        assert!((elliptic_k(0.0) - FRAC_PI_2).abs() < 1e-15);
    }

    #[test]
    fn sn_matches_limits() {
        let (s, d) = jacobi_sn_dn(0.7, 0.0);
        assert!((s - 0.7f64.sin()).abs() < 1e-15 && (d - 1.0).abs() < 1e-15);
        let k = 0.6;
        let (s, _) = jacobi_sn_dn(elliptic_k(k), k);
        assert!((s - 1.0).abs() < 1e-14);
    }

    #[test]
    fn corners_and_symmetry() {
        let k = square_modulus();
        let f = square_boundary_to_real;
        assert!((f(0.0) + 1.0).abs() < 1e-13);
        assert!((f(0.25) - 1.0).abs() < 1e-13);
        assert!((f(0.2499999999) - 1.0).abs() < 1e-8);
        assert!((f(0.5) - 1.0 / k).abs() < 1e-10);
        assert!((f(0.75) + 1.0 / k).abs() < 1e-10);
        assert!(f(0.125).abs() < 1e-15);
        for s in [0.03f64, 0.1, 0.3, 0.45] {
            // Reflection x ↦ 1 − x of the square is w ↦ −w.
            let mirror = (0.25 - s).rem_euclid(1.0);
            assert!((f(s) + f(mirror)).abs() < 1e-10 * f(s).abs().max(1.0), "s={s}");
        }
        let xs: Vec<f64> = (1..50).map(|i| f(i as f64 / 100.0)).collect();
        assert!(xs.windows(2).all(|w| w[0] < w[1]));
    }
}
