//! Discrete harmonic measure: H(y, x) = P_y(simple random walk first leaves
//! the interior through boundary site x).

use crate::domain::LatticeDomain;
use crate::error::{LatticeError, Result};

/// Required residual of the linear solve.
pub const SOLVE_TOL: f64 = 1e-12;

fn apply(dom: &LatticeDomain, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = dom.degree(i) as f64 * v[i] - dom.neighbors[i].iter().map(|&u| v[u]).sum::<f64>();
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves (D − A)g = e_y by conjugate gradients; g(v) = G(y, v)/deg(v) where
/// G counts expected visits before exit.
fn scaled_green(dom: &LatticeDomain, y: usize) -> Result<Vec<f64>> {
    let n = dom.n_sites();
    if y >= n {
        return Err(LatticeError::Site(y));
    }
    let mut g = vec![0.0; n];
    let mut r = vec![0.0; n];
    r[y] = 1.0;
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr: f64 = 1.0;
    for _ in 0..20 * n + 100 {
        if rr.sqrt() <= 0.05 * SOLVE_TOL {
            break;
        }
        apply(dom, &p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            g[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    // Check the true residual rather than the recursively updated one.
    apply(dom, &g, &mut ap);
    ap[y] -= 1.0;
    let res = dot(&ap, &ap).sqrt();
    if !(res <= SOLVE_TOL) {
        return Err(LatticeError::NotConverged(res));
    }
    Ok(g)
}

/// H(y, ·) over all boundary sites.
pub fn harmonic_measure_from(dom: &LatticeDomain, y: usize) -> Result<Vec<f64>> {
    let g = scaled_green(dom, y)?;
    let mut h = vec![0.0; dom.boundary.len()];
    for (v, bs) in dom.boundary_neighbors.iter().enumerate() {
        for &b in bs {
            h[b] += g[v];
        }
    }
    Ok(h)
}

/// H(y, x) for interior site y and boundary site x.
pub fn discrete_harmonic_measure(dom: &LatticeDomain, y: usize, x: usize) -> Result<f64> {
    if x >= dom.boundary.len() {
        return Err(LatticeError::Site(x));
    }
    Ok(harmonic_measure_from(dom, y)?[x])
}

/// The matrix H(yᵢ, xⱼ).
pub fn harmonic_matrix(dom: &LatticeDomain, y: &[usize], x: &[usize]) -> Result<Vec<Vec<f64>>> {
    if let Some(&b) = x.iter().find(|&&b| b >= dom.boundary.len()) {
        return Err(LatticeError::Site(b));
    }
    y.iter()
        .map(|&yi| {
            let h = harmonic_measure_from(dom, yi)?;
            Ok(x.iter().map(|&xj| h[xj]).collect())
        })
        .collect()
}
