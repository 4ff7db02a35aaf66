//! Euler-integral solutions ∫_C φₙ(x, u) du of the commutation system.
//!
//! φₙ(x, u) = ∏_{i<n, j<2n} (uᵢ−xⱼ)^{−4/κ} ∏_{i<n} (uᵢ−x_{2n})^{12/κ−2} ∏_{i₁<i₂<n} (u_{i₂}−u_{i₁})^{8/κ}
//!            × ∏_{j₁<j₂<2n} (x_{j₂}−x_{j₁})^{2/κ} ∏_{j<2n} (x_{2n}−xⱼ)^{1−6/κ}
//!
//! with n−1 integration variables. Cycles are products of Pochhammer loops
//! around the pairs of a non-crossing pairing that avoid x_{2n}, or the
//! nested family of loops from x_{2n} around x_{2n−1}, …, x_{n+1}.

use crate::contour::{
    pochhammer_loop_with_height, Chain, Contour, ContourError, LinearFactor, PairFactor, PreparedCycle, Primitive, ProductCycle, ProductIntegrand,
};
use crate::holonomy::{self, fit_order, HolonomyError, Jet, OperatorKind, SystemOperator};
use crate::pairings::{NonCrossingPairing, PairingError};
use crate::specialfn::{gamma_real, SpecialFnError};
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum EulerError {
    #[error("invalid configuration: {0}")]
    Configuration(String),
    #[error("invalid cycle: {0}")]
    Cycle(String),
    #[error("8/κ = {0} is a positive integer")]
    IntegerEightOverKappa(f64),
    #[error("κ = {0} outside the admissible range {1}")]
    KappaRange(f64, &'static str),
    #[error("coincident arguments in φₙ")]
    Coincident,
    #[error(transparent)]
    Contour(#[from] ContourError),
    #[error(transparent)]
    SpecialFn(#[from] SpecialFnError),
    #[error(transparent)]
    Pairing(#[from] PairingError),
    #[error(transparent)]
    Holonomy(#[from] HolonomyError),
}

type Result<T> = std::result::Result<T, EulerError>;

/// Marked points x₁ < … < x_{2n} on the real line and κ > 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Configuration {
    pub x: Vec<f64>,
    pub kappa: f64,
}

impl Configuration {
    pub fn new(x: Vec<f64>, kappa: f64) -> Result<Self> {
        if x.len() < 2 || x.len() % 2 != 0 {
            return Err(EulerError::Configuration(format!("need an even number ≥ 2 of points, got {}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) || x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(EulerError::Configuration("points must be finite and strictly increasing".into()));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(EulerError::Configuration(format!("κ = {kappa} must be positive")));
        }
        Ok(Self { x, kappa })
    }

    pub fn n(&self) -> usize {
        self.x.len() / 2
    }

    pub fn min_gap(&self) -> f64 {
        self.x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
    }

    /// The x-only prefactor ∏(x_{j₂}−x_{j₁})^{2/κ} ∏(x_{2n}−xⱼ)^{1−6/κ}.
    pub fn prefactor(&self) -> f64 {
        let m = self.x.len();
        let k = self.kappa;
        let mut log = 0.0;
        for j2 in 0..m - 1 {
            for j1 in 0..j2 {
                log += (2.0 / k) * (self.x[j2] - self.x[j1]).ln();
            }
            log += (1.0 - 6.0 / k) * (self.x[m - 1] - self.x[j2]).ln();
        }
        log.exp()
    }
}

/// The master integrand as a product integrand in the n−1 variables.
pub fn master_integrand(cfg: &Configuration) -> ProductIntegrand {
    let n = cfg.n();
    let k = cfg.kappa;
    let m = cfg.x.len();
    let c = |v: f64| Complex64::new(v, 0.0);
    let point_factors: Vec<Vec<LinearFactor>> = (0..n - 1)
        .map(|_| {
            let mut f: Vec<LinearFactor> = cfg.x[..m - 1].iter().map(|&xj| LinearFactor::point(c(xj), -4.0 / k, false)).collect();
            f.push(LinearFactor::point(c(cfg.x[m - 1]), 12.0 / k - 2.0, false));
            f
        })
        .collect();
    let mut pair_factors = Vec::new();
    for i2 in 0..n.saturating_sub(1) {
        for i1 in 0..i2 {
            pair_factors.push(PairFactor { i: i2, k: i1, sign: 1.0, exponent: 8.0 / k });
        }
    }
    ProductIntegrand { point_factors, pair_factors, prefactor: c(cfg.prefactor()) }
}

/// φₙ(x, u) with every factor on its principal branch.
pub fn phi_n(cfg: &Configuration, u: &[Complex64]) -> Result<Complex64> {
    let n = cfg.n();
    if u.len() != n - 1 {
        return Err(EulerError::Configuration(format!("need {} integration variables, got {}", n - 1, u.len())));
    }
    let k = cfg.kappa;
    let m = cfg.x.len();
    let mut log = Complex64::new(cfg.prefactor().ln(), 0.0);
    for (i, &ui) in u.iter().enumerate() {
        for (j, &xj) in cfg.x.iter().enumerate() {
            let d = ui - xj;
            if d.norm() == 0.0 {
                return Err(EulerError::Coincident);
            }
            let e = if j + 1 == m { 12.0 / k - 2.0 } else { -4.0 / k };
            log += e * d.ln();
        }
        for &ul in &u[..i] {
            let d = ui - ul;
            if d.norm() == 0.0 {
                return Err(EulerError::Coincident);
            }
            log += (8.0 / k) * d.ln();
        }
    }
    Ok(log.exp())
}

/// Which product cycle to integrate over.
#[derive(Clone, Debug, PartialEq)]
pub enum CycleSpec {
    /// Pochhammer loops around the pairs {a_k, b_k} of the pairing that do
    /// not contain x_{2n}; `loop_order[v]` is the index (in order of left
    /// endpoints) of the pair carried by integration variable v.
    PairingProduct { pairing: NonCrossingPairing, loop_order: Vec<usize> },
    /// Loops from x_{2n} circling x_{2n−i} counterclockwise, i = 1..n−1.
    Nested,
    /// Pochhammer loops around explicit 0-based point pairs, one per
    /// integration variable; the pairs must be disjoint and non-crossing.
    /// A loop around (x₁, x₄) at n = 2 passes above x₂ and x₃.
    Loops(Vec<(usize, usize)>),
}

impl CycleSpec {
    pub fn pairing_product(pairing: NonCrossingPairing) -> Self {
        let m = pairing.n().saturating_sub(1);
        CycleSpec::PairingProduct { pairing, loop_order: (0..m).collect() }
    }
}

/// The pairs of `p` not containing 2n, as 0-based (a, b) with a < b, sorted by a.
pub fn loop_pairs(p: &NonCrossingPairing) -> Vec<(usize, usize)> {
    let m = 2 * p.n();
    p.pairs().into_iter().filter(|&(_, b)| b != m).map(|(a, b)| (a - 1, b - 1)).collect()
}

fn adjacent_gap(x: &[f64], j: usize) -> f64 {
    let mut g = f64::INFINITY;
    if j > 0 {
        g = g.min(x[j] - x[j - 1]);
    }
    if j + 1 < x.len() {
        g = g.min(x[j + 1] - x[j]);
    }
    g
}

/// Pochhammer loops around `pairs` (in variable order). Heights grow with
/// the loops enclosed, so nested loops pass above each other.
fn pochhammer_family(x: &[f64], pairs: &[(usize, usize)]) -> Result<ProductCycle> {
    let clear: Vec<f64> = pairs.iter().map(|&(a, b)| 0.25 * adjacent_gap(x, a).min(adjacent_gap(x, b))).collect();
    let mut by_span: Vec<usize> = (0..pairs.len()).collect();
    by_span.sort_by_key(|&i| pairs[i].1 - pairs[i].0);
    let mut height = vec![0.0; pairs.len()];
    for &i in &by_span {
        let (a, b) = pairs[i];
        let inner = pairs
            .iter()
            .enumerate()
            .filter(|(_, &(c, d))| a < c && d < b)
            .map(|(j, _)| height[j])
            .fold(0.0, f64::max);
        height[i] = 2.0 * clear[i] + inner;
    }
    let contours = pairs
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| pochhammer_loop_with_height(x[a], x[b], clear[i], height[i]))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(ProductCycle { contours })
}

/// Builds the product cycle for `spec` at `cfg`.
pub fn build_cycle(cfg: &Configuration, spec: &CycleSpec) -> Result<ProductCycle> {
    let n = cfg.n();
    match spec {
        CycleSpec::PairingProduct { pairing, loop_order } => {
            if pairing.n() != n {
                return Err(EulerError::Cycle(format!("pairing of {} pairs for {} points", pairing.n(), cfg.x.len())));
            }
            let pairs = loop_pairs(pairing);
            let mut sorted = loop_order.clone();
            sorted.sort_unstable();
            if sorted != (0..pairs.len()).collect::<Vec<_>>() {
                return Err(EulerError::Cycle("loop order must be a permutation of the loop pairs".into()));
            }
            let ordered: Vec<(usize, usize)> = loop_order.iter().map(|&i| pairs[i]).collect();
            pochhammer_family(&cfg.x, &ordered)
        }
        CycleSpec::Loops(pairs) => {
            if pairs.len() != n - 1 {
                return Err(EulerError::Cycle(format!("{} loops for {} integration variables", pairs.len(), n - 1)));
            }
            let m = cfg.x.len();
            let mut used = vec![false; m];
            for &(a, b) in pairs {
                if a >= b || b >= m || used[a] || used[b] {
                    return Err(EulerError::Cycle(format!("bad loop pair ({a}, {b})")));
                }
                used[a] = true;
                used[b] = true;
            }
            for &(a, b) in pairs {
                for &(c, d) in pairs {
                    if a < c && c < b && b < d {
                        return Err(EulerError::Cycle(format!("loops ({a}, {b}) and ({c}, {d}) cross")));
                    }
                }
            }
            pochhammer_family(&cfg.x, pairs)
        }
        CycleSpec::Nested => {
            if n > 1 && 12.0 / cfg.kappa - 2.0 <= -1.0 {
                return Err(EulerError::KappaRange(cfg.kappa, "(0, 12) for paths ending at the last point"));
            }
            let x = &cfg.x;
            let m = x.len();
            let last = x[m - 1];
            let d = 0.25 * cfg.min_gap();
            let slots = 2 * (n.saturating_sub(1));
            let delta = if slots > 1 { FRAC_PI_4 / (slots - 1) as f64 } else { 0.0 };
            let angle = |s: usize| FRAC_PI_8 + s as f64 * delta;
            let c = |re: f64, im: f64| Complex64::new(re, im);
            let mut contours = Vec::with_capacity(n - 1);
            for i in 1..n {
                let xi = x[m - 1 - i];
                let (bot, top) = (angle(2 * (i - 1)), angle(2 * (i - 1) + 1));
                let p_top = c(xi - d, (last - xi + d) * top.tan());
                let p_bot = c(xi + d, (last - xi - d) * bot.tan());
                let base = c(xi, -d);
                let forward = Chain::new(vec![
                    Primitive::arc(c(xi, 0.0), d, -FRAC_PI_2, FRAC_PI_2),
                    Primitive::segment(c(xi + d, 0.0), p_bot),
                    Primitive::segment(p_bot, c(last, 0.0)),
                ]);
                let backward = Chain::new(vec![
                    Primitive::arc(c(xi, 0.0), d, -FRAC_PI_2, -FRAC_PI_2),
                    Primitive::segment(c(xi - d, 0.0), p_top),
                    Primitive::segment(p_top, c(last, 0.0)),
                ]);
                contours.push(Contour::new(base, vec![(forward, 1.0), (backward, -1.0)]));
            }
            Ok(ProductCycle { contours })
        }
    }
}

/// ∫_C φₙ du over the cycle described by `spec`. For n = 1 this is the prefactor.
pub fn euler_solution(cfg: &Configuration, spec: &CycleSpec, tol: f64) -> Result<Complex64> {
    let cycle = build_cycle(cfg, spec)?;
    Ok(crate::contour::integrate_product_cycle(&master_integrand(cfg), &cycle, tol)?)
}

/// An Euler solution whose quadrature rule is frozen at a reference
/// configuration; evaluating it at nearby points gives a function of x that
/// is smooth to rounding level, as needed for finite differences.
pub struct FrozenEulerSolution {
    kappa: f64,
    prepared: PreparedCycle,
}

impl FrozenEulerSolution {
    pub fn new(cfg: &Configuration, spec: &CycleSpec, tol: f64) -> Result<Self> {
        let cycle = build_cycle(cfg, spec)?;
        let prepared = PreparedCycle::new(&master_integrand(cfg), &cycle, tol)?;
        Ok(Self { kappa: cfg.kappa, prepared })
    }

    pub fn eval(&self, x: &[f64]) -> Result<Complex64> {
        let cfg = Configuration::new(x.to_vec(), self.kappa)?;
        Ok(self.prepared.integrate(&master_integrand(&cfg))?)
    }
}

fn check_kappa_non_integer(kappa: f64) -> Result<()> {
    let r = 8.0 / kappa;
    if r >= 1.0 && (r - r.round()).abs() <= 1e-12 * r {
        return Err(EulerError::IntegerEightOverKappa(r));
    }
    Ok(())
}

/// c_κ = 4π²/(Γ(2−8/κ)Γ(4/κ)²).
pub fn c_kappa(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(EulerError::KappaRange(kappa, "(0, ∞)"));
    }
    check_kappa_non_integer(kappa)?;
    let g = gamma_real(4.0 / kappa)?;
    Ok(4.0 * PI * PI / (gamma_real(2.0 - 8.0 / kappa)? * g * g))
}

/// The equivalent form 4 sin²(4π/κ) Γ(1−4/κ)²/Γ(2−8/κ).
pub fn c_kappa_sine_form(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) {
        return Err(EulerError::KappaRange(kappa, "(0, ∞)"));
    }
    check_kappa_non_integer(kappa)?;
    let s = (4.0 * PI / kappa).sin();
    let g = gamma_real(1.0 - 4.0 / kappa)?;
    Ok(4.0 * s * s * g * g / gamma_real(2.0 - 8.0 / kappa)?)
}

/// Result of [`collapse_limit_check`].
#[derive(Clone, Debug, Serialize)]
pub struct CollapseReport {
    pub eps: Vec<f64>,
    /// |gap^{6/κ−1} ∫_C φₙ| at each gap.
    pub scaled: Vec<f64>,
    /// Richardson-extrapolated modulus at gap → 0.
    pub limit: f64,
    /// |c_κ| · |∫ φ_{n−1}| on the reduced configuration.
    pub expected: f64,
    pub rel_error: f64,
    pub pass: bool,
}

/// Gap multipliers used by [`collapse_limit_check`]: x_{k+1} = x_k + ε (x_{k+2} − x_k).
pub const COLLAPSE_EPS: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Checks lim (x_{k+1}−x_k)^{6/κ−1} ∫_C φₙ = c_κ ∫_Ĉ φ_{n−1} in modulus, with k
/// 1-based and {x_k, x_{k+1}} a pair of `pairing`. The collapsing point is
/// moved toward x_k; the remaining points stay where `cfg` has them.
pub fn collapse_limit_check(cfg: &Configuration, pairing: &NonCrossingPairing, k: usize, tol: f64) -> Result<CollapseReport> {
    let n = cfg.n();
    let m = cfg.x.len();
    if pairing.n() != n {
        return Err(EulerError::Cycle("pairing size does not match the configuration".into()));
    }
    if k == 0 || k + 1 >= m {
        return Err(EulerError::Cycle(format!("need 1 ≤ k and k + 1 < 2n, got k = {k}")));
    }
    if pairing.partner(k) != k + 1 {
        return Err(EulerError::Cycle(format!("x_{k} and x_{} are not paired", k + 1)));
    }
    let kappa = cfg.kappa;
    let c = c_kappa(kappa)?;
    let span = cfg.x[k + 1] - cfg.x[k - 1];
    let mut eps = Vec::new();
    let mut vals = Vec::new();
    for &e in &COLLAPSE_EPS {
        let mut x = cfg.x.clone();
        x[k] = x[k - 1] + e * span;
        let sub = Configuration::new(x, kappa)?;
        let v = euler_solution(&sub, &CycleSpec::pairing_product(pairing.clone()), tol)?;
        let g = e * span;
        eps.push(e);
        vals.push(v * g.powf(6.0 / kappa - 1.0));
    }
    // Richardson on the complex values: corrections are integer powers of the gap.
    let r = COLLAPSE_EPS[0] / COLLAPSE_EPS[1];
    let r1: Vec<Complex64> = (0..vals.len() - 1).map(|i| (r * vals[i + 1] - vals[i]) / (r - 1.0)).collect();
    let r2 = (r * r * r1[1] - r1[0]) / (r * r - 1.0);
    let limit = r2.norm();

    let mut xr = Vec::with_capacity(m - 2);
    for (j, &v) in cfg.x.iter().enumerate() {
        if j != k - 1 && j != k {
            xr.push(v);
        }
    }
    let reduced_cfg = Configuration::new(xr, kappa)?;
    let reduced_pairing = pairing.without_pair(k)?;
    let inner = euler_solution(&reduced_cfg, &CycleSpec::pairing_product(reduced_pairing), tol)?;
    let expected = c.abs() * inner.norm();
    let rel_error = (limit - expected).abs() / expected;
    Ok(CollapseReport { eps, scaled: vals.iter().map(|v| v.norm()).collect(), limit, expected, rel_error, pass: rel_error <= 1e-3 })
}

/// Result of [`psi_nonintersection`].
#[derive(Clone, Debug, Serialize)]
pub struct PsiResult {
    pub psi: f64,
    pub integral: Complex64,
}

/// ψ = |c_κ|^{1−n} ∏(b_k−a_k)^{6/κ−1} |∫_C φₙ| for κ ∈ (0, 8/3), 8/κ ∉ ℕ,
/// with C the pairing-product cycle. The value is returned as computed; it
/// is not clamped to [0, 1] (at n = 2 it grows without bound as x₂ → x₃).
pub fn psi_nonintersection(cfg: &Configuration, pairing: &NonCrossingPairing, tol: f64) -> Result<PsiResult> {
    let kappa = cfg.kappa;
    if !(kappa > 0.0 && kappa < 8.0 / 3.0) {
        return Err(EulerError::KappaRange(kappa, "(0, 8/3)"));
    }
    check_kappa_non_integer(kappa)?;
    let n = cfg.n();
    if pairing.n() != n {
        return Err(EulerError::Cycle("pairing size does not match the configuration".into()));
    }
    let integral = euler_solution(cfg, &CycleSpec::pairing_product(pairing.clone()), tol)?;
    let c = c_kappa(kappa)?.abs();
    let mut log = (1.0 - n as f64) * c.ln() + integral.norm().ln();
    for (a, b) in pairing.pairs() {
        log += (6.0 / kappa - 1.0) * (cfg.x[b - 1] - cfg.x[a - 1]).ln();
    }
    Ok(PsiResult { psi: log.exp(), integral })
}

/// Coefficient gᵢ(u) in the divergence form of 𝓛_k φ = −Σᵢ ∂_{uᵢ}(gᵢ φ) (k 1-based).
pub fn lemma_coefficient(cfg: &Configuration, u: &[Complex64], k: usize, i: usize) -> Complex64 {
    let m = cfg.x.len();
    let x = &cfg.x;
    let ui = u[i];
    let two = Complex64::new(2.0, 0.0);
    if k < m {
        return two / (ui - x[k - 1]);
    }
    let last = x[m - 1];
    let mut prod = Complex64::new(1.0, 0.0);
    for &xj in &x[..m - 1] {
        prod *= (ui - xj) / (last - xj);
    }
    for (j, &uj) in u.iter().enumerate() {
        if j != i {
            let r = (last - uj) / (ui - uj);
            prod *= r * r;
        }
    }
    two / (ui - last) + (cfg.kappa - 8.0) / (ui - last) * prod
}

/// Result of a divergence-form identity check.
#[derive(Clone, Debug, Serialize)]
pub struct LemmaReport {
    pub k: usize,
    pub steps: Vec<f64>,
    pub residuals: Vec<f64>,
    pub order: f64,
    pub pass: bool,
}

/// Compares 𝓛_k φ (finite differences in x) with −Σᵢ ∂_{uᵢ}(gᵢ φ) (finite
/// differences in u) at the given steps; pass iff the relative residual
/// decays with fitted order ≥ 1.8.
pub fn lemma_check(cfg: &Configuration, u: &[Complex64], k: usize, steps: &[f64]) -> Result<LemmaReport> {
    let m = cfg.x.len();
    if k == 0 || k > m {
        return Err(EulerError::Configuration(format!("k = {k} out of range")));
    }
    let kappa = cfg.kappa;
    let op = SystemOperator { kind: OperatorKind::L { k }, kappa, n: cfg.n() };
    let f = |x: &[f64]| -> Result<Complex64> { phi_n(&Configuration::new(x.to_vec(), kappa)?, u) };
    let mut residuals = Vec::new();
    for &h in steps {
        let j: Jet = holonomy::jet(&f, &cfg.x, h)?;
        let (lhs, _) = op.apply_jet(&cfg.x, &j);
        let mut rhs = Complex64::new(0.0, 0.0);
        for i in 0..u.len() {
            let g = |s: f64| -> Result<Complex64> {
                let mut v = u.to_vec();
                v[i] += s;
                Ok(lemma_coefficient(cfg, &v, k, i) * phi_n(cfg, &v)?)
            };
            rhs -= (g(h)? - g(-h)?) / (2.0 * h);
        }
        residuals.push((lhs - rhs).norm() / lhs.norm().max(rhs.norm()));
    }
    let order = fit_order(steps, &residuals);
    Ok(LemmaReport { k, steps: steps.to_vec(), residuals, order, pass: order >= holonomy::REQUIRED_ORDER })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn c_kappa_excluded_values() {
        assert!(c_kappa(8.0 / 3.0).is_err());
        assert!(c_kappa(2.0).is_err());
        assert!(c_kappa(8.0).is_err());
        assert!(c_kappa(2.5).is_ok());
    }

    #[test]
    fn c_kappa_sixteen_thirds() {
        let v = c_kappa(16.0 / 3.0).unwrap();
        assert!((v - 14.832_597_418_410_975).abs() < 1e-12 * v);
    }

    #[test]
    fn n1_is_prefactor() {
        let cfg = Configuration::new(vec![0.5, 2.5], 3.0).unwrap();
        let p = NonCrossingPairing::from_pairs(&[(1, 2)]).unwrap();
        let v = euler_solution(&cfg, &CycleSpec::pairing_product(p), 1e-10).unwrap();
        assert!((v.re - 2.0f64.powf(1.0 - 2.0)).abs() < 1e-15);
        assert_eq!(phi_n(&cfg, &[]).unwrap().re, v.re);
    }

    #[test]
    fn configuration_validation() {
        assert!(Configuration::new(vec![0.0, 1.0, 0.5, 2.0], 3.0).is_err());
        assert!(Configuration::new(vec![0.0, 1.0, 2.0], 3.0).is_err());
        assert!(Configuration::new(vec![0.0, 1.0], -1.0).is_err());
    }

    #[test]
    fn coincident_arguments_error() {
        let cfg = Configuration::new(vec![0.0, 1.0, 2.0, 4.0], 6.0).unwrap();
        assert!(matches!(phi_n(&cfg, &[Complex64::new(1.0, 0.0)]), Err(EulerError::Coincident)));
    }

    #[test]
    fn collapse_index_checks() {
        let cfg = Configuration::new(vec![0.0, 1.0, 2.0, 3.0], 3.0).unwrap();
        let p = NonCrossingPairing::from_pairs(&[(1, 2), (3, 4)]).unwrap();
        assert!(collapse_limit_check(&cfg, &p, 3, 1e-10).is_err());
        assert!(collapse_limit_check(&cfg, &p, 2, 1e-10).is_err());
    }
}
