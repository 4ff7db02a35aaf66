//! The operators of the commutation system, finite-difference verification
//! of annihilation, and the polynomial solution space of the κ → ∞ limit.
//!
//! For 2n marked points x₁ < … < x_{2n} the system consists of
//!
//! * L_k = (κ/2)∂_kk + Σ_{l≠k} 2∂_l/(x_l−x_k) + ((κ−6)/κ) Σ_{l≠k} 1/(x_l−x_k)², k = 1..2n,
//! * ℓ₋₁ = Σ ∂_k,
//! * ℓ₀ = Σ x_k∂_k − n(1−6/κ),
//! * ℓ₁ = Σ x_k²∂_k − (1−6/κ)Σ x_k.

use crate::pairings::enumerate_noncrossing_pairings;
use num_complex::Complex64;
use num_rational::Rational64;
use num_traits::{CheckedAdd, CheckedMul, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HolonomyError {
    #[error("step {h} too large for minimum gap {gap} (need h < gap/10)")]
    StepTooLarge { h: f64, gap: f64 },
    #[error("points must be strictly increasing with even count ≥ 2")]
    BadPoints,
    #[error("operator index {0} out of range")]
    BadIndex(usize),
    #[error("function evaluation failed: {0}")]
    Evaluation(String),
    #[error("exact arithmetic overflow")]
    Overflow,
    #[error("n = {0} unsupported (need 1 ≤ n ≤ 8)")]
    Size(usize),
}

type Result<T> = std::result::Result<T, HolonomyError>;

/// One operator of the system.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum OperatorKind {
    /// L_k with 1-based index k.
    L { k: usize },
    LMinus1,
    L0,
    L1,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemOperator {
    pub kind: OperatorKind,
    pub kappa: f64,
    pub n: usize,
}

impl SystemOperator {
    /// All 2n + 3 operators of the system.
    pub fn all(n: usize, kappa: f64) -> Vec<SystemOperator> {
        let mut v: Vec<SystemOperator> = (1..=2 * n).map(|k| SystemOperator { kind: OperatorKind::L { k }, kappa, n }).collect();
        for kind in [OperatorKind::LMinus1, OperatorKind::L0, OperatorKind::L1] {
            v.push(SystemOperator { kind, kappa, n });
        }
        v
    }

    pub fn label(&self) -> String {
        match self.kind {
            OperatorKind::L { k } => format!("L{k}"),
            OperatorKind::LMinus1 => "l-1".into(),
            OperatorKind::L0 => "l0".into(),
            OperatorKind::L1 => "l1".into(),
        }
    }

    /// Applies the operator to precomputed derivatives; returns (value, Σ|terms|).
    pub fn apply_jet(&self, x: &[f64], jet: &Jet) -> (Complex64, f64) {
        let m = x.len();
        let h = 1.0 - 6.0 / self.kappa;
        let mut acc = Complex64::new(0.0, 0.0);
        let mut mag = 0.0;
        let mut add = |t: Complex64| {
            acc += t;
            mag += t.norm();
        };
        match self.kind {
            OperatorKind::L { k } => {
                let k = k - 1;
                add(0.5 * self.kappa * jet.hess_diag[k]);
                for l in 0..m {
                    if l == k {
                        continue;
                    }
                    let d = x[l] - x[k];
                    add(2.0 * jet.grad[l] / d);
                    add(h * jet.value / (d * d));
                }
            }
            OperatorKind::LMinus1 => {
                for g in &jet.grad {
                    add(*g);
                }
            }
            OperatorKind::L0 => {
                for (xi, g) in x.iter().zip(&jet.grad) {
                    add(*xi * g);
                }
                add(-(self.n as f64) * h * jet.value);
            }
            OperatorKind::L1 => {
                for (xi, g) in x.iter().zip(&jet.grad) {
                    add(xi * xi * g);
                }
                add(-h * x.iter().sum::<f64>() * jet.value);
            }
        }
        (acc, mag)
    }
}

/// Value, gradient and diagonal second derivatives from central differences.
#[derive(Clone, Debug)]
pub struct Jet {
    pub value: Complex64,
    pub grad: Vec<Complex64>,
    pub hess_diag: Vec<Complex64>,
}

fn check_points(x: &[f64]) -> Result<f64> {
    if x.len() < 2 || x.len() % 2 != 0 || x.iter().any(|v| !v.is_finite()) {
        return Err(HolonomyError::BadPoints);
    }
    let mut gap = f64::INFINITY;
    for w in x.windows(2) {
        if !(w[1] > w[0]) {
            return Err(HolonomyError::BadPoints);
        }
        gap = gap.min(w[1] - w[0]);
    }
    Ok(gap)
}

/// Central-difference jet of `f` at `x` with step `h`.
pub fn jet<F, E>(f: &F, x: &[f64], h: f64) -> Result<Jet>
where
    F: Fn(&[f64]) -> std::result::Result<Complex64, E> + Sync,
    E: std::fmt::Display,
{
    let gap = check_points(x)?;
    if !(h > 0.0) || h >= gap / 10.0 {
        return Err(HolonomyError::StepTooLarge { h, gap });
    }
    let eval = |y: &[f64]| f(y).map_err(|e| HolonomyError::Evaluation(e.to_string()));
    let value = eval(x)?;
    let mut grad = Vec::with_capacity(x.len());
    let mut hess = Vec::with_capacity(x.len());
    let mut y = x.to_vec();
    for k in 0..x.len() {
        y[k] = x[k] + h;
        let fp = eval(&y)?;
        y[k] = x[k] - h;
        let fm = eval(&y)?;
        y[k] = x[k];
        grad.push((fp - fm) / (2.0 * h));
        hess.push((fp - 2.0 * value + fm) / (h * h));
    }
    Ok(Jet { value, grad, hess_diag: hess })
}

/// Central finite-difference application of one operator.
pub fn apply_operator<F, E>(op: &SystemOperator, f: &F, x: &[f64], h: f64) -> Result<Complex64>
where
    F: Fn(&[f64]) -> std::result::Result<Complex64, E> + Sync,
    E: std::fmt::Display,
{
    if x.len() != 2 * op.n {
        return Err(HolonomyError::BadPoints);
    }
    if let OperatorKind::L { k } = op.kind {
        if k == 0 || k > x.len() {
            return Err(HolonomyError::BadIndex(k));
        }
    }
    let j = jet(f, x, h)?;
    Ok(op.apply_jet(x, &j).0)
}

/// Residuals of one operator at each step, with the fitted order.
#[derive(Clone, Debug, Serialize)]
pub struct OperatorReport {
    pub operator: String,
    pub residuals: Vec<f64>,
    pub magnitudes: Vec<f64>,
    pub order: f64,
    /// Every residual is at the rounding level of the terms it cancels.
    pub noise_floor: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnnihilationReport {
    pub steps: Vec<f64>,
    pub operators: Vec<OperatorReport>,
    /// Smallest fitted order among operators not at the noise floor.
    pub order: f64,
    pub pass: bool,
}

/// Order required of every operator residual.
pub const REQUIRED_ORDER: f64 = 1.8;

/// Relative size below which a residual counts as cancellation to rounding level.
pub const NOISE_FLOOR: f64 = 1e-9;

/// Least-squares slope of log r against log h.
pub fn fit_order(steps: &[f64], residuals: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = steps.iter().zip(residuals).filter(|(_, r)| **r > 0.0).map(|(h, r)| (h.ln(), r.ln())).collect();
    if pts.len() < 2 {
        return f64::NAN;
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// Default step multipliers (times the minimum gap).
pub const DEFAULT_STEPS: [f64; 2] = [1e-2, 1e-3];

/// Applies all 2n + 3 operators at each step and fits convergence orders.
/// `steps` are absolute step sizes, decreasing.
pub fn verify_annihilation<F, E>(f: &F, x: &[f64], kappa: f64, steps: &[f64]) -> Result<AnnihilationReport>
where
    F: Fn(&[f64]) -> std::result::Result<Complex64, E> + Sync,
    E: std::fmt::Display,
{
    check_points(x)?;
    let n = x.len() / 2;
    let ops = SystemOperator::all(n, kappa);
    let jets: Vec<Jet> = steps.iter().map(|&h| jet(f, x, h)).collect::<Result<_>>()?;
    let mut reports = Vec::with_capacity(ops.len());
    for op in &ops {
        let mut residuals = Vec::new();
        let mut magnitudes = Vec::new();
        for j in &jets {
            let (r, m) = op.apply_jet(x, j);
            residuals.push(r.norm());
            magnitudes.push(m);
        }
        let noise_floor = residuals.iter().zip(&magnitudes).all(|(r, m)| *r <= NOISE_FLOOR * m.max(f64::MIN_POSITIVE));
        let order = fit_order(steps, &residuals);
        let pass = noise_floor || order >= REQUIRED_ORDER;
        reports.push(OperatorReport { operator: op.label(), residuals, magnitudes, order, noise_floor, pass });
    }
    let order = reports.iter().filter(|r| !r.noise_floor).map(|r| r.order).fold(f64::INFINITY, |a, b| if b.is_nan() { f64::NAN } else { a.min(b) });
    let pass = reports.iter().all(|r| r.pass);
    Ok(AnnihilationReport { steps: steps.to_vec(), operators: reports, order, pass })
}

/// [`verify_annihilation`] with steps {1e-2, 1e-3} × min gap.
pub fn verify_annihilation_default<F, E>(f: &F, x: &[f64], kappa: f64) -> Result<AnnihilationReport>
where
    F: Fn(&[f64]) -> std::result::Result<Complex64, E> + Sync,
    E: std::fmt::Display,
{
    let gap = check_points(x)?;
    let steps: Vec<f64> = DEFAULT_STEPS.iter().map(|s| s * gap).collect();
    verify_annihilation(f, x, kappa, &steps)
}

/// A polynomial with exact rational coefficients; monomials are exponent vectors.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Polynomial {
    pub nvars: usize,
    pub terms: BTreeMap<Vec<u32>, Rational64>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, mono: Vec<u32>, c: Rational64) -> Result<()> {
        if c.is_zero() {
            return Ok(());
        }
        let old = self.coefficient(&mono);
        let new = old.checked_add(&c).ok_or(HolonomyError::Overflow)?;
        if new.is_zero() {
            self.terms.remove(&mono);
        } else {
            self.terms.insert(mono, new);
        }
        Ok(())
    }

    /// ∏ (x_a − x_b) over the given index pairs (0-based).
    pub fn pair_product(nvars: usize, pairs: &[(usize, usize)]) -> Result<Self> {
        let mut p = Polynomial::zero(nvars);
        p.terms.insert(vec![0; nvars], Rational64::from_integer(1));
        for &(a, b) in pairs {
            let mut q = Polynomial::zero(nvars);
            for (mono, c) in &p.terms {
                let mut ma = mono.clone();
                ma[a] += 1;
                q.add_term(ma, *c)?;
                let mut mb = mono.clone();
                mb[b] += 1;
                q.add_term(mb, -*c)?;
            }
            p = q;
        }
        Ok(p)
    }

    pub fn sub(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -*c)?;
        }
        Ok(out)
    }

    pub fn scaled(&self, s: Rational64) -> Result<Polynomial> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.checked_mul(&s).ok_or(HolonomyError::Overflow)?)?;
        }
        Ok(out)
    }

    /// ∂/∂x_k.
    pub fn derivative(&self, k: usize) -> Result<Polynomial> {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            if m[k] > 0 {
                let mut d = m.clone();
                d[k] -= 1;
                let f = Rational64::from_integer(m[k] as i64);
                out.add_term(d, c.checked_mul(&f).ok_or(HolonomyError::Overflow)?)?;
            }
        }
        Ok(out)
    }

    /// x_k^p · self.
    pub fn times_var(&self, k: usize, p: u32) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut d = m.clone();
            d[k] += p;
            out.terms.insert(d, *c);
        }
        out
    }

    pub fn add(&self, other: &Polynomial) -> Result<Polynomial> {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), *c)?;
        }
        Ok(out)
    }

    pub fn coefficient(&self, mono: &[u32]) -> Rational64 {
        self.terms.get(mono).copied().unwrap_or_else(Rational64::zero)
    }

    /// Polynomial with variables permuted: x_i ↦ x_{perm[i]}.
    pub fn permuted(&self, perm: &[usize]) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (m, c) in &self.terms {
            let mut d = vec![0; self.nvars];
            for (i, &e) in m.iter().enumerate() {
                d[perm[i]] = e;
            }
            out.terms.insert(d, *c);
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| {
                let v: f64 = m.iter().zip(x).map(|(&e, &xi)| xi.powi(e as i32)).product();
                v * (*c.numer() as f64) / (*c.denom() as f64)
            })
            .sum()
    }

    pub fn is_multilinear(&self) -> bool {
        self.terms.keys().all(|m| m.iter().all(|&e| e <= 1))
    }

    pub fn homogeneous_degree(&self) -> Option<u32> {
        let mut it = self.terms.keys().map(|m| m.iter().sum::<u32>());
        let d = it.next()?;
        it.all(|e| e == d).then_some(d)
    }
}

/// The κ → ∞ system applied exactly: ∂_kk for every k, Σ∂_k, Σx_k∂_k − n,
/// Σx_k²∂_k − Σx_k. Returns the images, all of which vanish for a solution.
pub fn kappa_inf_images(p: &Polynomial, n: usize) -> Result<Vec<Polynomial>> {
    let m = p.nvars;
    let mut out = Vec::with_capacity(m + 3);
    let mut grads = Vec::with_capacity(m);
    for k in 0..m {
        let d = p.derivative(k)?;
        out.push(d.derivative(k)?);
        grads.push(d);
    }
    let mut lm1 = Polynomial::zero(m);
    let mut l0 = p.scaled(Rational64::from_integer(-(n as i64)))?;
    let mut l1 = Polynomial::zero(m);
    for (k, g) in grads.iter().enumerate() {
        lm1 = lm1.add(g)?;
        l0 = l0.add(&g.times_var(k, 1))?;
        l1 = l1.add(&g.times_var(k, 2))?.sub(&p.times_var(k, 1))?;
    }
    out.push(lm1);
    out.push(l0);
    out.push(l1);
    Ok(out)
}

/// Result of [`kappa_inf_basis`].
#[derive(Clone, Debug)]
pub struct KappaInfBasis {
    pub n: usize,
    /// Basis polynomials ∏(x_a − x_b) over the pairs of each non-crossing pairing.
    pub basis: Vec<Polynomial>,
    /// Pivot monomial of each basis element (the product of the left endpoints).
    pub pivots: Vec<Vec<u32>>,
}

impl KappaInfBasis {
    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    /// Exact reduction of `p` against the basis; returns the remainder
    /// (zero iff p lies in the span).
    pub fn reduce(&self, p: &Polynomial) -> Result<Polynomial> {
        let mut r = p.clone();
        for (b, piv) in self.basis.iter().zip(&self.pivots) {
            let c = r.coefficient(piv);
            if !c.is_zero() {
                r = r.sub(&b.scaled(c)?)?;
            }
        }
        Ok(r)
    }
}

/// The span of the orbit of (x₁−x_{n+1})⋯(xₙ−x_{2n}) under permutations of
/// the 2n variables, with a basis in exact rational arithmetic.
///
/// Candidates are the products over non-crossing pairings, sorted by their
/// left-endpoint monomial. Each candidate has coefficient 1 at its own pivot
/// and 0 at every earlier pivot, which is checked exactly, so they are
/// independent. The span is then shown to be the orbit span: it contains the
/// seed polynomial and is closed under every adjacent transposition.
pub fn kappa_inf_basis(n: usize) -> Result<KappaInfBasis> {
    if n == 0 || n > 8 {
        return Err(HolonomyError::Size(n));
    }
    let m = 2 * n;
    let mut cands: Vec<(Vec<u32>, Polynomial)> = Vec::new();
    for p in enumerate_noncrossing_pairings(n) {
        let pairs: Vec<(usize, usize)> = p.pairs().into_iter().map(|(a, b)| (a - 1, b - 1)).collect();
        let mut piv = vec![0u32; m];
        for &(a, _) in &pairs {
            piv[a] = 1;
        }
        cands.push((piv, Polynomial::pair_product(m, &pairs)?));
    }
    // Later pivots are lexicographically larger as 0/1 words read from x_1; sort descending
    // on the word so the ordering is by left endpoints first.
    cands.sort_by(|a, b| b.0.cmp(&a.0));
    let one = Rational64::from_integer(1);
    for (i, (piv, poly)) in cands.iter().enumerate() {
        if poly.coefficient(piv) != one {
            return Err(HolonomyError::Evaluation("pivot coefficient is not 1".into()));
        }
        for (q, _) in &cands[..i] {
            if !poly.coefficient(q).is_zero() {
                return Err(HolonomyError::Evaluation("candidate set is not triangular".into()));
            }
        }
    }
    let basis = KappaInfBasis { n, pivots: cands.iter().map(|c| c.0.clone()).collect(), basis: cands.into_iter().map(|c| c.1).collect() };

    let seed_pairs: Vec<(usize, usize)> = (0..n).map(|i| (i, i + n)).collect();
    let seed = Polynomial::pair_product(m, &seed_pairs)?;
    if !basis.reduce(&seed)?.is_zero() {
        return Err(HolonomyError::Evaluation("seed polynomial outside the span".into()));
    }
    for b in &basis.basis {
        for s in 0..m - 1 {
            let mut perm: Vec<usize> = (0..m).collect();
            perm.swap(s, s + 1);
            if !basis.reduce(&b.permuted(&perm))?.is_zero() {
                return Err(HolonomyError::Evaluation("span not closed under transpositions".into()));
            }
        }
    }
    Ok(basis)
}
