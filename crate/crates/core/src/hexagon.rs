//! Percolation crossing probabilities (κ = 6, six marked points) for the
//! threefold-symmetric configurations (𝕌, 1, u, j, ju, j², j²u), j = e^{2iπ/3}.
//!
//! With u = e^{iθ}, w = sin²(3θ/2) runs from 0 to 1 on (1, e^{iπ/3}] and
//! back to 0 on [e^{iπ/3}, j). The Mercedes probability g(u) splits into
//! g₊ = g(u) + g(j/u) = c₁g₁ + c₃ and g₋ = g(j/u) − g(u) = c₂g₂, where
//! gᵢ(w) = ∫_w^1 hᵢ(s) ds.

use crate::pairings::{NonCrossingPartition, PairingError};
use crate::quad::tanh_sinh_real;
use crate::specialfn::{gamma_real, hyp2f1_reflected, hyp3f2_at_one, HypergeometricParams, SpecialFnError};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HexagonError {
    #[error("w = {0} outside {1}")]
    Domain(f64, &'static str),
    #[error("θ = {0} rad is not on the open arc (1, j)")]
    OffArc(f64),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
}

type Result<T> = std::result::Result<T, HexagonError>;

const QUAD_TOL: f64 = 1e-13;

/// Which half of the arc (1, j) the point u lies on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HalfArc {
    /// (1, e^{iπ/3}]: blue sides no longer than yellow ones.
    First,
    /// (e^{iπ/3}, j).
    Second,
}

/// The configuration (𝕌, 1, u, j, ju, j², j²u) with u = e^{iθ}, θ ∈ (0, 2π/3).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SymmetricHexConfig {
    pub theta: f64,
    pub u: Complex64,
    pub w: f64,
    pub half: HalfArc,
}

impl SymmetricHexConfig {
    pub fn from_theta(theta: f64) -> Result<Self> {
        if !(theta > 0.0 && theta < 2.0 * PI / 3.0) {
            return Err(HexagonError::OffArc(theta));
        }
        let s = (1.5 * theta).sin();
        let half = if theta <= FRAC_PI_3 { HalfArc::First } else { HalfArc::Second };
        Ok(Self { theta, u: Complex64::from_polar(1.0, theta), w: s * s, half })
    }

    pub fn from_degrees(deg: f64) -> Result<Self> {
        Self::from_theta(deg.to_radians())
    }

    /// The regular hexagon, u = e^{iπ/3}, w = 1.
    pub fn regular() -> Self {
        Self { theta: FRAC_PI_3, u: Complex64::from_polar(1.0, FRAC_PI_3), w: 1.0, half: HalfArc::First }
    }

    /// The mirrored configuration u ↦ j/u.
    pub fn mirrored(&self) -> Result<Self> {
        Self::from_theta(2.0 * PI / 3.0 - self.theta)
    }
}

fn f1(y: f64) -> Result<f64> {
    // ₂F₁(5/6, 5/6; 3/2; 1 − y)
    Ok(hyp2f1_reflected(HypergeometricParams::real(5.0 / 6.0, 5.0 / 6.0, 1.5), Complex64::new(y, 0.0))?.re)
}

fn f2(y: f64) -> Result<f64> {
    // ₂F₁(1/3, 1/3; 1/2; 1 − y)
    Ok(hyp2f1_reflected(HypergeometricParams::real(1.0 / 3.0, 1.0 / 3.0, 0.5), Complex64::new(y, 0.0))?.re)
}

/// h₁(w) = w^{−1/2}₂F₁(5/6,5/6;3/2;1−w), h₂(w) = w^{−1/2}(1−w)^{−1/2}₂F₁(1/3,1/3;1/2;1−w).
pub fn h_functions(w: f64) -> Result<(f64, f64)> {
    if !(w > 0.0 && w < 1.0) {
        return Err(HexagonError::Domain(w, "(0, 1)"));
    }
    let r = w.sqrt();
    Ok((f1(w)? / r, f2(w)? / (r * (1.0 - w).sqrt())))
}

/// gᵢ(w) = ∫_w^1 hᵢ(s) ds, with s = sin²φ removing both square-root endpoints.
pub fn g_functions(w: f64) -> Result<(f64, f64)> {
    if !(0.0..=1.0).contains(&w) {
        return Err(HexagonError::Domain(w, "[0, 1]"));
    }
    if w == 1.0 {
        return Ok((0.0, 0.0));
    }
    let phi0 = w.sqrt().asin();
    let mut err = None;
    // h₁ ds = 2 cos φ F₁(sin²φ) dφ and h₂ ds = 2 F₂(sin²φ) dφ.
    let mut eval = |phi: f64, which: u8| -> f64 {
        let y = phi.sin().powi(2);
        if y < 1e-250 {
            // Integrand is O(φ^{−1/3}); these nodes carry no weight.
            return 0.0;
        }
        let v = if which == 1 { f1(y).map(|f| 2.0 * phi.cos() * f) } else { f2(y).map(|f| 2.0 * f) };
        v.unwrap_or_else(|e| {
            err.get_or_insert(e);
            0.0
        })
    };
    let (g1, _) = tanh_sinh_real(|p, _, _| eval(p, 1), phi0, FRAC_PI_2, QUAD_TOL);
    let (g2, _) = tanh_sinh_real(|p, _, _| eval(p, 2), phi0, FRAC_PI_2, QUAD_TOL);
    if let Some(e) = err {
        return Err(e);
    }
    Ok((g1, g2))
}

/// The constants with g₊ = c₁g₁ + c₃ and g₋ = c₂g₂.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HexConstants {
    pub c1: f64,
    pub c2: f64,
    pub c3: f64,
}

/// g₁(0) = ₃F₂(1, 5/6, 5/6; 3/2, 3/2; 1)·B(1, 1/2).
pub fn g1_at_zero() -> Result<f64> {
    let c = |v: f64| Complex64::new(v, 0.0);
    Ok(2.0 * hyp3f2_at_one(c(1.0), c(5.0 / 6.0), c(5.0 / 6.0), c(1.5), c(1.5))?.re)
}

/// g₂(0) = Γ(1/3)Γ(1/2)²/Γ(2/3)².
pub fn g2_at_zero() -> Result<f64> {
    Ok(gamma_real(1.0 / 3.0)? * PI / gamma_real(2.0 / 3.0)?.powi(2))
}

/// c₂ = √3Γ(2/3)³/(2π²), c₁ = (√3/(2^{2/3}π))⁵Γ(2/3)⁹ and c₃ = 1 − c₁g₁(0).
pub fn hex_constants() -> Result<HexConstants> {
    let g23 = gamma_real(2.0 / 3.0)?;
    let c2 = 3f64.sqrt() * g23.powi(3) / (2.0 * PI * PI);
    let c1 = (3f64.sqrt() / (2f64.powf(2.0 / 3.0) * PI)).powi(5) * g23.powi(9);
    let c3 = 1.0 - c1 * g1_at_zero()?;
    Ok(HexConstants { c1, c2, c3 })
}

/// (g₊(w), g₋(w)).
pub fn g_plus_minus(w: f64) -> Result<(f64, f64)> {
    let k = hex_constants()?;
    let (g1, g2) = g_functions(w)?;
    Ok((k.c1 * g1 + k.c3, k.c2 * g2))
}

/// g(u): the probability that the three blue sides (1,u), (j,ju), (j²,j²u)
/// lie in one blue cluster.
pub fn mercedes_probability(cfg: &SymmetricHexConfig) -> Result<f64> {
    let (gp, gm) = g_plus_minus(cfg.w)?;
    Ok(match cfg.half {
        HalfArc::First => 0.5 * (gp - gm),
        HalfArc::Second => 0.5 * (gp + gm),
    })
}

/// (1 − c₃)/3 evaluated as (2/3)(√3/(2^{2/3}π))⁵Γ(2/3)⁹₃F₂(1,5/6,5/6;3/2,3/2;1).
pub fn regular_hexagon_two_side_probability() -> Result<f64> {
    let c = |v: f64| Complex64::new(v, 0.0);
    let g23 = gamma_real(2.0 / 3.0)?;
    let f = hyp3f2_at_one(c(1.0), c(5.0 / 6.0), c(5.0 / 6.0), c(1.5), c(1.5))?.re;
    Ok(2.0 / 3.0 * (3f64.sqrt() / (2f64.powf(2.0 / 3.0) * PI)).powi(5) * g23.powi(9) * f)
}

/// One elementary crossing event: the partition of the blue sides e₁, e₃, e₅
/// into clusters, with its probability.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HexEvent {
    pub partition: NonCrossingPartition,
    pub probability: f64,
}

/// The five elementary events, ordered as: all blue sides joined, the three
/// two-side events {e₁,e₃}, {e₃,e₅}, {e₁,e₅}, then all blue sides separated
/// (the yellow Mercedes event, g(j/u)).
pub fn event_probabilities(cfg: &SymmetricHexConfig) -> Result<Vec<HexEvent>> {
    let (gp, gm) = g_plus_minus(cfg.w)?;
    let (blue, yellow) = match cfg.half {
        HalfArc::First => (0.5 * (gp - gm), 0.5 * (gp + gm)),
        HalfArc::Second => (0.5 * (gp + gm), 0.5 * (gp - gm)),
    };
    let q = (1.0 - gp) / 3.0;
    let blocks: [(Vec<Vec<usize>>, f64); 5] = [
        (vec![vec![1, 3, 5]], blue),
        (vec![vec![1, 3], vec![5]], q),
        (vec![vec![1], vec![3, 5]], q),
        (vec![vec![1, 5], vec![3]], q),
        (vec![vec![1], vec![3], vec![5]], yellow),
    ];
    blocks
        .into_iter()
        .map(|(b, p)| Ok(HexEvent { partition: NonCrossingPartition::new(3, b)?, probability: p }))
        .collect()
}
