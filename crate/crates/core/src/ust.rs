//! κ = 8: the hyperelliptic period determinant
//! ψ(x) = ∏_{i<j}(xⱼ−xᵢ)^{1/4} det(∫_{C_j} ωᵢ), with ωᵢ = u^{i−1}du/√∏(u−x_k),
//! or equivalently the shifted basis ω′ᵢ = (u−x₁)^{i−1}du/√∏(u−x_k).
//! C_j circles the segment (x_{2j−1}, x_{2j}) clockwise, j = 1..n−1.

use crate::contour::{segment_loop, ContourError, LinearFactor, PreparedCycle, ProductCycle, ProductIntegrand};
use crate::euler::{Configuration, EulerError};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum UstError {
    #[error("need at least {0} marked points, got {1}")]
    TooFewPoints(usize, usize),
    #[error("period matrix is singular")]
    Singular,
    #[error("step h = {0} must lie in (0, min gap / 10)")]
    Step(f64),
    #[error(transparent)]
    Configuration(#[from] EulerError),
    #[error(transparent)]
    Contour(#[from] ContourError),
}

type Result<T> = std::result::Result<T, UstError>;

/// Default quadrature tolerance for period integrals.
pub const PERIOD_TOL: f64 = 1e-13;

/// Which basis of holomorphic differentials builds the rows.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodBasis {
    /// ωᵢ = u^{i−1} du/√∏(u−x_k).
    Monomial,
    /// ω′ᵢ = (u−x₁)^{i−1} du/√∏(u−x_k).
    Shifted,
}

/// Pᵢⱼ = ∫_{C_j} ωᵢ (or ω′ᵢ), an (n−1)×(n−1) complex matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PeriodMatrix {
    pub basis: PeriodBasis,
    pub entries: Vec<Vec<Complex64>>,
}

impl PeriodMatrix {
    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn to_matrix(&self) -> DMatrix<Complex64> {
        let m = self.size();
        DMatrix::from_fn(m, m, |i, j| self.entries[i][j])
    }

    pub fn det(&self) -> Complex64 {
        self.to_matrix().determinant()
    }
}

fn validate(x: &[f64]) -> Result<Configuration> {
    if x.len() < 4 {
        return Err(UstError::TooFewPoints(4, x.len()));
    }
    Ok(Configuration::new(x.to_vec(), 8.0)?)
}

fn entry_integrand(x: &[f64], row: usize, basis: PeriodBasis) -> ProductIntegrand {
    let c = |v: f64| Complex64::new(v, 0.0);
    let mut f: Vec<LinearFactor> = x.iter().map(|&xk| LinearFactor::point(c(xk), -0.5, false)).collect();
    match basis {
        PeriodBasis::Shifted => f[0] = LinearFactor::point(c(x[0]), row as f64 - 0.5, false),
        PeriodBasis::Monomial => {
            if row > 0 {
                f.push(LinearFactor::point(c(0.0), row as f64, false));
            }
        }
    }
    ProductIntegrand { point_factors: vec![f], pair_factors: Vec::new(), prefactor: c(1.0) }
}

fn cycles(cfg: &Configuration) -> Result<Vec<ProductCycle>> {
    let x = &cfg.x;
    let n = cfg.n();
    let gap = |k: usize| {
        let mut g = f64::INFINITY;
        if k > 0 {
            g = g.min(x[k] - x[k - 1]);
        }
        if k + 1 < x.len() {
            g = g.min(x[k + 1] - x[k]);
        }
        g
    };
    (0..n - 1)
        .map(|j| {
            let (a, b) = (2 * j, 2 * j + 1);
            let clear = 0.25 * gap(a).min(gap(b));
            Ok(ProductCycle { contours: vec![segment_loop(x[a], x[b], clear)?] })
        })
        .collect()
}

/// Period integrals with quadrature rules frozen at a reference
/// configuration, so that nearby configurations are integrated with the same
/// nodes and finite differences in x are smooth.
pub struct FrozenPeriods {
    basis: PeriodBasis,
    n: usize,
    rules: Vec<Vec<PreparedCycle>>,
}

impl FrozenPeriods {
    pub fn new(x: &[f64], basis: PeriodBasis, tol: f64) -> Result<Self> {
        let cfg = validate(x)?;
        let n = cfg.n();
        let cyc = cycles(&cfg)?;
        let mut rules = Vec::with_capacity(n - 1);
        for i in 0..n - 1 {
            let phi = entry_integrand(x, i, basis);
            rules.push(cyc.iter().map(|c| PreparedCycle::new(&phi, c, tol)).collect::<std::result::Result<Vec<_>, _>>()?);
        }
        Ok(Self { basis, n, rules })
    }

    pub fn eval(&self, x: &[f64]) -> Result<PeriodMatrix> {
        let cfg = validate(x)?;
        if cfg.n() != self.n {
            return Err(UstError::TooFewPoints(2 * self.n, x.len()));
        }
        let mut entries = Vec::with_capacity(self.n - 1);
        for (i, row) in self.rules.iter().enumerate() {
            let phi = entry_integrand(x, i, self.basis);
            entries.push(row.iter().map(|r| r.integrate(&phi)).collect::<std::result::Result<Vec<_>, _>>()?);
        }
        Ok(PeriodMatrix { basis: self.basis, entries })
    }

    /// ∏_{i<j}(xⱼ−xᵢ)^{1/4} det P as a complex number.
    pub fn psi_complex(&self, x: &[f64]) -> Result<Complex64> {
        Ok(vandermonde_quarter(x) * self.eval(x)?.det())
    }
}

/// The period matrix at x in the given basis.
pub fn period_matrix(x: &[f64], basis: PeriodBasis) -> Result<PeriodMatrix> {
    let p = FrozenPeriods::new(x, basis, PERIOD_TOL)?.eval(x)?;
    if p.det().norm() == 0.0 {
        return Err(UstError::Singular);
    }
    Ok(p)
}

fn vandermonde_quarter(x: &[f64]) -> f64 {
    let mut log = 0.0;
    for j in 0..x.len() {
        for i in 0..j {
            log += 0.25 * (x[j] - x[i]).ln();
        }
    }
    log.exp()
}

#[derive(Clone, Debug, Serialize)]
pub struct UstPsi {
    pub psi: f64,
    pub det_monomial: Complex64,
    pub det_shifted: Complex64,
}

/// |∏_{i<j}(xⱼ−xᵢ)^{1/4} det P|, computed in both bases.
pub fn psi_ust(x: &[f64]) -> Result<UstPsi> {
    let det_shifted = period_matrix(x, PeriodBasis::Shifted)?.det();
    let det_monomial = period_matrix(x, PeriodBasis::Monomial)?.det();
    Ok(UstPsi { psi: vandermonde_quarter(x) * det_shifted.norm(), det_monomial, det_shifted })
}

fn check_step(x: &[f64], h: f64) -> Result<()> {
    let gap = x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    if !(h > 0.0 && h < gap / 10.0) {
        return Err(UstError::Step(h));
    }
    Ok(())
}

/// Default step for the x₁-derivative identities: 1e-4 × min gap.
pub fn default_step(x: &[f64]) -> f64 {
    1e-4 * x.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Central difference ∂_{x₁}P (shifted basis) with a frozen rule, and P itself.
fn d_x1(x: &[f64], h: f64) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>)> {
    check_step(x, h)?;
    let frozen = FrozenPeriods::new(x, PeriodBasis::Shifted, PERIOD_TOL)?;
    let shift = |s: f64| {
        let mut y = x.to_vec();
        y[0] += s;
        frozen.eval(&y).map(|p| p.to_matrix())
    };
    let dp = (shift(h)? - shift(-h)?) / Complex64::new(2.0 * h, 0.0);
    Ok((frozen.eval(x)?.to_matrix(), dp))
}

#[derive(Clone, Debug, Serialize)]
pub struct RecursionReport {
    pub h: f64,
    /// Largest relative residual of ∂_{x₁}P_{i+1,·} − (1/2 − i)P_{i,·}, per i.
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub pass: bool,
}

/// Tolerance for the x₁-derivative identities.
pub const IDENTITY_TOL: f64 = 1e-5;

/// Checks ∂_{x₁}ω′_{i+1} = (1/2 − i)ω′ᵢ on every period, i = 1..n−2.
pub fn verify_omega_recursion(x: &[f64], h: f64) -> Result<RecursionReport> {
    let cfg = validate(x)?;
    let n = cfg.n();
    if n < 3 {
        return Ok(RecursionReport { h, residuals: Vec::new(), max_residual: 0.0, pass: true });
    }
    let (p, dp) = d_x1(x, h)?;
    let mut residuals = Vec::with_capacity(n - 2);
    for i in 1..=n - 2 {
        let mut worst: f64 = 0.0;
        for j in 0..n - 1 {
            let want = (0.5 - i as f64) * p[(i - 1, j)];
            worst = worst.max((dp[(i, j)] - want).norm() / want.norm().max(dp[(i, j)].norm()));
        }
        residuals.push(worst);
    }
    let max_residual = residuals.iter().cloned().fold(0.0, f64::max);
    Ok(RecursionReport { h, residuals, max_residual, pass: max_residual <= IDENTITY_TOL })
}

#[derive(Clone, Debug, Serialize)]
pub struct DriftReport {
    pub h: f64,
    /// 8 Tr(P⁻¹∂P) e₁ + 8 P ∂(P⁻¹) e₁.
    pub lhs: Vec<Complex64>,
    /// |lhs − 4e₂|∞.
    pub residual: f64,
    /// Largest deviation of rows 2.. of ∂P·P⁻¹ from the subdiagonal pattern 1/2 − i.
    pub companion_residual: f64,
    pub pass: bool,
}

/// Checks 8 Tr(P⁻¹∂ₓP)e₁ + 8P∂ₓ(P⁻¹)e₁ = 4e₂ with x = x₁, n ≥ 3.
pub fn verify_drift_identity(x: &[f64], h: f64) -> Result<DriftReport> {
    let cfg = validate(x)?;
    let n = cfg.n();
    if n < 3 {
        return Err(UstError::TooFewPoints(6, x.len()));
    }
    let (p, dp) = d_x1(x, h)?;
    let pinv = p.clone().try_inverse().ok_or(UstError::Singular)?;
    let trace = (&pinv * &dp).trace();
    // ∂(P⁻¹) = −P⁻¹ ∂P P⁻¹.
    let m = &dp * &pinv;
    let k = n - 1;
    let eight = Complex64::new(8.0, 0.0);
    let lhs: Vec<Complex64> = (0..k).map(|r| eight * (if r == 0 { trace } else { Complex64::new(0.0, 0.0) }) - eight * m[(r, 0)]).collect();
    let residual = lhs
        .iter()
        .enumerate()
        .map(|(r, v)| (v - Complex64::new(if r == 1 { 4.0 } else { 0.0 }, 0.0)).norm())
        .fold(0.0, f64::max);
    let mut companion_residual: f64 = 0.0;
    for r in 1..k {
        for c in 0..k {
            // Row r holds ∂ω′_{r+1} = (1/2 − r)ω′_r.
            let want = if c + 1 == r { 0.5 - r as f64 } else { 0.0 };
            companion_residual = companion_residual.max((m[(r, c)] - Complex64::new(want, 0.0)).norm());
        }
    }
    Ok(DriftReport { h, lhs, residual, companion_residual, pass: residual <= IDENTITY_TOL })
}
