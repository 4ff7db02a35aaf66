//! κ = 2 determinantal solutions det((xᵢ − yⱼ)^{−2}) and the continuum
//! Fomin density det((xᵢ − yⱼ)^{−2}) ∏(xᵢ − yᵢ)².

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FominError {
    #[error("x and y must be non-empty and of equal length (got {0} and {1})")]
    Length(usize, usize),
    #[error("coincident points x[{0}] = y[{1}]")]
    Coincident(usize, usize),
    #[error("points must satisfy x₁ < … < xₙ < yₙ < … < y₁")]
    Ordering,
    #[error("pair index {0} out of range 1..={1}")]
    Index(usize, usize),
}

type Result<T> = std::result::Result<T, FominError>;

fn check(x: &[f64], y: &[f64]) -> Result<()> {
    if x.is_empty() || x.len() != y.len() {
        return Err(FominError::Length(x.len(), y.len()));
    }
    for (i, xi) in x.iter().enumerate() {
        for (j, yj) in y.iter().enumerate() {
            if xi == yj {
                return Err(FominError::Coincident(i, j));
            }
        }
    }
    Ok(())
}

/// det((xᵢ − yⱼ)^{−2}).
pub fn fomin_determinant(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    let n = x.len();
    Ok(DMatrix::from_fn(n, n, |i, j| (x[i] - y[j]).powi(-2)).determinant())
}

/// Whether x₁ < … < xₙ < yₙ < … < y₁.
pub fn is_nested(x: &[f64], y: &[f64]) -> bool {
    let n = x.len();
    n > 0
        && n == y.len()
        && x.iter().chain(y.iter().rev()).all(|v| v.is_finite())
        && x.windows(2).all(|w| w[0] < w[1])
        && y.windows(2).all(|w| w[0] > w[1])
        && x[n - 1] < y[n - 1]
}

/// det((xᵢ − yⱼ)^{−2}) ∏(xᵢ − yᵢ)² for a nested configuration.
pub fn fomin_density(x: &[f64], y: &[f64]) -> Result<f64> {
    check(x, y)?;
    if !is_nested(x, y) {
        return Err(FominError::Ordering);
    }
    Ok(density_unchecked(x, y))
}

fn density_unchecked(x: &[f64], y: &[f64]) -> f64 {
    // Scaling row i by (xᵢ − yᵢ)² keeps the matrix entries O(1).
    let n = x.len();
    DMatrix::from_fn(n, n, |i, j| ((x[i] - y[i]) / (x[i] - y[j])).powi(2)).determinant()
}

/// det((xᵢ − yⱼ)^{−2}) over ℚ.
pub fn fomin_determinant_exact(x: &[BigRational], y: &[BigRational]) -> Result<BigRational> {
    if x.is_empty() || x.len() != y.len() {
        return Err(FominError::Length(x.len(), y.len()));
    }
    let n = x.len();
    let mut m = Vec::with_capacity(n);
    for (i, xi) in x.iter().enumerate() {
        let mut row = Vec::with_capacity(n);
        for (j, yj) in y.iter().enumerate() {
            let d = xi - yj;
            if d.is_zero() {
                return Err(FominError::Coincident(i, j));
            }
            row.push((&d * &d).recip());
        }
        m.push(row);
    }
    Ok(det_exact(m))
}

/// det((xᵢ − yⱼ)^{−2}) ∏(xᵢ − yᵢ)² over ℚ, without the ordering check.
pub fn fomin_density_exact(x: &[BigRational], y: &[BigRational]) -> Result<BigRational> {
    let d = fomin_determinant_exact(x, y)?;
    Ok(x.iter().zip(y).fold(d, |acc, (a, b)| {
        let g = a - b;
        acc * &g * &g
    }))
}

fn det_exact(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut det = BigRational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&r| !m[r][c].is_zero()) else {
            return BigRational::zero();
        };
        if p != c {
            m.swap(p, c);
            det = -det;
        }
        let piv = m[c][c].clone();
        det *= &piv;
        for r in c + 1..n {
            if m[r][c].is_zero() {
                continue;
            }
            let f = &m[r][c] / &piv;
            for k in c..n {
                let t = &f * &m[c][k];
                m[r][k] -= t;
            }
        }
    }
    det
}

/// Converts a float to the exact rational it represents.
pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).unwrap_or_else(|| BigRational::from_integer(BigInt::zero()))
}

/// Result of [`fomin_collapse_check`].
#[derive(Clone, Debug, Serialize)]
pub struct FominCollapseReport {
    pub pair: usize,
    pub deltas: Vec<f64>,
    pub values: Vec<f64>,
    pub limit: f64,
    pub expected: f64,
    pub rel_error: f64,
    pub pass: bool,
}

/// Relative offsets δ/(scale) used for the collapse yᵢ = xᵢ + δ.
pub const COLLAPSE_DELTAS: [f64; 2] = [1e-3, 1e-4];

/// Lets yᵢ → xᵢ⁺ (pair index 1-based) and compares the limit of the density
/// with the density of the remaining n − 1 pairs. The error is O(δ²), which
/// one Richardson step removes.
pub fn fomin_collapse_check(x: &[f64], y: &[f64], i: usize) -> Result<FominCollapseReport> {
    check(x, y)?;
    if !is_nested(x, y) {
        return Err(FominError::Ordering);
    }
    let n = x.len();
    if i == 0 || i > n {
        return Err(FominError::Index(i, n));
    }
    let scale = x.iter().chain(y).fold(f64::INFINITY, |g, &a| {
        let nearest = x.iter().chain(y).filter(|&&b| b != a).map(|&b| (a - b).abs()).fold(f64::INFINITY, f64::min);
        g.min(nearest)
    });
    let mut values = Vec::new();
    let mut deltas = Vec::new();
    for r in COLLAPSE_DELTAS {
        let mut yy = y.to_vec();
        yy[i - 1] = x[i - 1] + r * scale;
        deltas.push(r * scale);
        values.push(density_unchecked(x, &yy));
    }
    let q = (COLLAPSE_DELTAS[0] / COLLAPSE_DELTAS[1]).powi(2);
    let limit = (q * values[1] - values[0]) / (q - 1.0);
    let expected = if n == 1 {
        1.0
    } else {
        let xr: Vec<f64> = x.iter().enumerate().filter(|&(k, _)| k != i - 1).map(|(_, &v)| v).collect();
        let yr: Vec<f64> = y.iter().enumerate().filter(|&(k, _)| k != i - 1).map(|(_, &v)| v).collect();
        density_unchecked(&xr, &yr)
    };
    let rel_error = (limit - expected).abs() / expected.abs().max(f64::MIN_POSITIVE);
    Ok(FominCollapseReport { pair: i, deltas, values, limit, expected, rel_error, pass: rel_error <= 1e-8 })
}

/// Sign-aware comparison helper for exact densities in [0, 1].
pub fn in_unit_interval(v: &BigRational) -> bool {
    !v.is_negative() && v <= &BigRational::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn two_by_two_exact() {
        let d = fomin_determinant_exact(&[q(0, 1), q(1, 1)], &[q(3, 1), q(2, 1)]).unwrap();
        assert_eq!(d, q(7, 144));
        let p = fomin_density_exact(&[q(0, 1), q(1, 1)], &[q(3, 1), q(2, 1)]).unwrap();
        assert_eq!(p, q(7, 16));
    }

    #[test]
    fn errors() {
        assert_eq!(fomin_determinant(&[0.0], &[0.0]), Err(FominError::Coincident(0, 0)));
        assert_eq!(fomin_determinant(&[0.0, 1.0], &[2.0]), Err(FominError::Length(2, 1)));
        assert_eq!(fomin_density(&[0.0, 1.0], &[2.0, 3.0]), Err(FominError::Ordering));
        assert!(matches!(fomin_collapse_check(&[0.0], &[1.0], 2), Err(FominError::Index(2, 1))));
    }
}
