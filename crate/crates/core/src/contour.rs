//! Branch-tracked quadrature of products of complex powers along piecewise
//! arc/segment paths, Pochhammer (double contour) loops, and nested
//! integration over Cartesian products of such paths.
//!
//! Every factor is a linear form L(t) = c0 + c1·t raised to a real power.
//! Its logarithm starts on the principal branch at the contour's base point
//! and is continued along the path by summing principal logarithms of ratios
//! between consecutive quadrature nodes. Panels are refined until every
//! singular point sits at least one panel length away, so each increment
//! stays far below π/2 and the continuation is exact.

use crate::quad::{self, TsNode};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, PI};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContourError {
    #[error("invalid loop: {0}")]
    InvalidLoop(String),
    #[error("path is not closed: chain ends at {0} instead of the base point or an integrable singular endpoint")]
    NotClosed(Complex64),
    #[error("path passes within machine clearance of the singular point {0}")]
    SingularPath(Complex64),
    #[error("factor paths intersect or touch (distance {0:e})")]
    IntersectingPaths(f64),
    #[error("endpoint singularity at {point} is not integrable (exponent {exponent})")]
    NonIntegrable { point: Complex64, exponent: f64 },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

type Result<T> = std::result::Result<T, ContourError>;

/// Ratio between the distance from a panel to any singular point and the panel length.
const CLEARANCE_RATIO: f64 = 1.0;

/// A path primitive. Arcs are parametrized by angle: center + radius·e^{iθ},
/// θ from `theta0` to `theta0 + sweep`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Primitive {
    Segment { from: Complex64, to: Complex64 },
    Arc { center: Complex64, radius: f64, theta0: f64, sweep: f64 },
}

impl Primitive {
    pub fn segment(from: Complex64, to: Complex64) -> Self {
        Primitive::Segment { from, to }
    }

    pub fn arc(center: Complex64, radius: f64, theta0: f64, sweep: f64) -> Self {
        Primitive::Arc { center, radius, theta0, sweep }
    }

    pub fn start(&self) -> Complex64 {
        match *self {
            Primitive::Segment { from, .. } => from,
            Primitive::Arc { center, radius, theta0, .. } => center + Complex64::from_polar(radius, theta0),
        }
    }

    pub fn end(&self) -> Complex64 {
        match *self {
            Primitive::Segment { to, .. } => to,
            Primitive::Arc { center, radius, theta0, sweep } => center + Complex64::from_polar(radius, theta0 + sweep),
        }
    }

    pub fn length(&self) -> f64 {
        match *self {
            Primitive::Segment { from, to } => (to - from).norm(),
            Primitive::Arc { radius, sweep, .. } => radius * sweep.abs(),
        }
    }

    fn reversed(&self) -> Self {
        match *self {
            Primitive::Segment { from, to } => Primitive::Segment { from: to, to: from },
            Primitive::Arc { center, radius, theta0, sweep } => Primitive::Arc { center, radius, theta0: theta0 + sweep, sweep: -sweep },
        }
    }

    fn map(&self, scale: f64, shift: Complex64) -> Self {
        match *self {
            Primitive::Segment { from, to } => Primitive::Segment { from: from * scale + shift, to: to * scale + shift },
            Primitive::Arc { center, radius, theta0, sweep } => Primitive::Arc { center: center * scale + shift, radius: radius * scale, theta0, sweep },
        }
    }
}

/// A continuous chain of primitives.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Chain {
    pub pieces: Vec<Primitive>,
}

impl Chain {
    pub fn new(pieces: Vec<Primitive>) -> Self {
        let pieces = pieces.into_iter().filter(|p| p.length() > 0.0).collect();
        Self { pieces }
    }

    pub fn start(&self) -> Option<Complex64> {
        self.pieces.first().map(|p| p.start())
    }

    pub fn end(&self) -> Option<Complex64> {
        self.pieces.last().map(|p| p.end())
    }

    pub fn reversed(&self) -> Self {
        Self { pieces: self.pieces.iter().rev().map(|p| p.reversed()).collect() }
    }

    pub fn length(&self) -> f64 {
        self.pieces.iter().map(|p| p.length()).sum()
    }

    /// Points sampled along the chain, at spacing at most `step`.
    pub fn sample(&self, step: f64) -> Vec<Complex64> {
        let mut out = Vec::new();
        for p in &self.pieces {
            let m = ((p.length() / step).ceil() as usize).max(1);
            for k in 0..=m {
                out.push(point_on(p, k as f64 / m as f64));
            }
        }
        out
    }
}

fn point_on(p: &Primitive, tau: f64) -> Complex64 {
    match *p {
        Primitive::Segment { from, to } => from + (to - from) * tau,
        Primitive::Arc { center, radius, theta0, sweep } => center + Complex64::from_polar(radius, theta0 + sweep * tau),
    }
}

/// An integration contour: one or more chains leaving a common base point,
/// each with an orientation sign. A closed loop is a single chain returning
/// to the base; an open path through the base is split into two chains
/// (forward with +1, backward with −1) ending at singular points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Contour {
    pub base: Complex64,
    pub branches: Vec<(Chain, f64)>,
}

impl Contour {
    pub fn new(base: Complex64, branches: Vec<(Chain, f64)>) -> Self {
        Self { base, branches }
    }

    pub fn closed(chain: Chain) -> Self {
        let base = chain.start().unwrap_or_default();
        Self { base, branches: vec![(chain, 1.0)] }
    }

    /// The contour traversed in the opposite direction.
    pub fn reversed(&self) -> Self {
        let branches = self
            .branches
            .iter()
            .map(|(ch, s)| {
                if ch.end().map(|e| (e - self.base).norm() <= 1e-14 * (1.0 + self.base.norm())).unwrap_or(false) {
                    (ch.reversed(), *s)
                } else {
                    (ch.clone(), -*s)
                }
            })
            .collect();
        Self { base: self.base, branches }
    }

    /// Image under t ↦ scale·t + shift (scale > 0).
    pub fn mapped(&self, scale: f64, shift: Complex64) -> Self {
        Self {
            base: self.base * scale + shift,
            branches: self
                .branches
                .iter()
                .map(|(ch, s)| (Chain { pieces: ch.pieces.iter().map(|p| p.map(scale, shift)).collect() }, *s))
                .collect(),
        }
    }

    fn sample(&self, step: f64) -> Vec<Complex64> {
        let mut v = vec![self.base];
        for (ch, _) in &self.branches {
            v.extend(ch.sample(step));
        }
        v
    }

    fn length(&self) -> f64 {
        self.branches.iter().map(|(c, _)| c.length()).sum()
    }
}

/// A factor (c0 + c1·t)^exponent.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFactor {
    pub c0: Complex64,
    pub c1: Complex64,
    pub exponent: f64,
}

impl LinearFactor {
    pub fn new(c0: Complex64, c1: Complex64, exponent: f64) -> Self {
        Self { c0, c1, exponent }
    }

    /// (t − s)^e, or (s − t)^e when `reversed`.
    pub fn point(s: Complex64, exponent: f64, reversed: bool) -> Self {
        if reversed {
            Self { c0: s, c1: Complex64::new(-1.0, 0.0), exponent }
        } else {
            Self { c0: -s, c1: Complex64::new(1.0, 0.0), exponent }
        }
    }

    pub fn root(&self) -> Complex64 {
        -self.c0 / self.c1
    }

    fn eval(&self, anchor: Complex64, offset: Complex64, anchored_root: bool) -> Complex64 {
        if anchored_root {
            self.c1 * offset
        } else {
            (self.c0 + self.c1 * anchor) + self.c1 * offset
        }
    }
}

/// ∏ⱼ (c0ⱼ + c1ⱼ t)^{eⱼ} times a constant prefactor and a phase e^{i·base_phase};
/// the determination is principal at the contour base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MultiPowerIntegrand {
    pub factors: Vec<LinearFactor>,
    pub prefactor: Complex64,
    pub base_phase: f64,
}

impl MultiPowerIntegrand {
    pub fn new(factors: Vec<LinearFactor>, prefactor: Complex64) -> Self {
        Self { factors, prefactor, base_phase: 0.0 }
    }

    /// Convenience constructor for ∏ (t − sⱼ)^{eⱼ}.
    pub fn from_points(points: &[Complex64], exponents: &[f64]) -> Self {
        let factors = points.iter().zip(exponents).map(|(&s, &e)| LinearFactor::point(s, e, false)).collect();
        Self::new(factors, Complex64::new(1.0, 0.0))
    }
}

/// A node of a discretized contour: position anchor + offset (kept separate
/// so differences between nearby points stay accurate), the complex weight
/// (including orientation sign), and the index of the factor whose root is
/// the anchor, if any.
#[derive(Clone, Copy, Debug)]
struct Node {
    anchor: Complex64,
    offset: Complex64,
    weight: Complex64,
    anchored_root: Option<usize>,
}

impl Node {
    fn pos(&self) -> Complex64 {
        self.anchor + self.offset
    }
}

#[derive(Clone, Debug)]
struct BranchRule {
    nodes: Vec<Node>,
}

/// A singular point to keep clear of. Points tagged with `cone` belong to
/// paths converging to that endpoint and are ignored by the endpoint panel there.
#[derive(Clone, Copy, Debug)]
struct Obstacle {
    point: Complex64,
    cone: Option<Complex64>,
}

#[derive(Clone, Copy, Debug)]
enum Panel {
    /// Segment panel: points `anchor + off0 + τ (off1 − off0)`, τ ∈ [0,1].
    Seg { anchor: Complex64, off0: Complex64, off1: Complex64 },
    /// Arc panel: center + R e^{iθ}, θ ∈ [t0, t1].
    Arc { center: Complex64, radius: f64, t0: f64, t1: f64 },
    /// Segment panel ending exactly at the singular point `anchor` (root of factor `root`).
    EndSeg { anchor: Complex64, off0: Complex64, root: usize },
}

impl Panel {
    fn length(&self) -> f64 {
        match *self {
            Panel::Seg { off0, off1, .. } => (off1 - off0).norm(),
            Panel::Arc { radius, t0, t1, .. } => radius * (t1 - t0).abs(),
            Panel::EndSeg { off0, .. } => off0.norm(),
        }
    }

    fn distance(&self, q: Complex64) -> f64 {
        match *self {
            Panel::Seg { anchor, off0, off1 } => seg_distance(anchor + off0, anchor + off1, q),
            Panel::EndSeg { anchor, off0, .. } => seg_distance(anchor + off0, anchor, q),
            Panel::Arc { center, radius, t0, t1 } => {
                let d = q - center;
                let (lo, hi) = if t0 <= t1 { (t0, t1) } else { (t1, t0) };
                let ang = d.arg();
                let mut inside = false;
                for k in -3..=3 {
                    let a = ang + 2.0 * PI * k as f64;
                    if a >= lo && a <= hi {
                        inside = true;
                        break;
                    }
                }
                if inside {
                    (d.norm() - radius).abs()
                } else {
                    let p0 = center + Complex64::from_polar(radius, t0);
                    let p1 = center + Complex64::from_polar(radius, t1);
                    (q - p0).norm().min((q - p1).norm())
                }
            }
        }
    }

    fn split(&self) -> (Panel, Panel) {
        match *self {
            Panel::Seg { anchor, off0, off1 } => {
                let mid = 0.5 * (off0 + off1);
                (Panel::Seg { anchor, off0, off1: mid }, Panel::Seg { anchor, off0: mid, off1 })
            }
            Panel::Arc { center, radius, t0, t1 } => {
                let m = 0.5 * (t0 + t1);
                (Panel::Arc { center, radius, t0, t1: m }, Panel::Arc { center, radius, t0: m, t1 })
            }
            Panel::EndSeg { anchor, off0, root } => {
                let mid = 0.5 * off0;
                (Panel::Seg { anchor, off0, off1: mid }, Panel::EndSeg { anchor, off0: mid, root })
            }
        }
    }

    fn gk_nodes(&self) -> Vec<(Complex64, Complex64, f64, f64)> {
        // (anchor, offset, Re dz, Im dz) per Kronrod node, dz scaled to the [-1, 1] rule
        let mut out = Vec::with_capacity(15);
        for (x, _, _) in quad::gk15_nodes() {
            let tau = 0.5 * (x + 1.0);
            match *self {
                Panel::Seg { anchor, off0, off1 } => {
                    let dz = (off1 - off0) * 0.5;
                    out.push((anchor, off0 + (off1 - off0) * tau, dz.re, dz.im));
                }
                Panel::Arc { center, radius, t0, t1 } => {
                    let th = t0 + (t1 - t0) * tau;
                    let e = Complex64::from_polar(radius, th);
                    let dz = Complex64::i() * e * (0.5 * (t1 - t0));
                    out.push((center, e, dz.re, dz.im));
                }
                Panel::EndSeg { .. } => unreachable!("endpoint panels use tanh-sinh"),
            }
        }
        out
    }
}

fn seg_distance(a: Complex64, b: Complex64, q: Complex64) -> f64 {
    let ab = b - a;
    let l2 = ab.norm_sqr();
    if l2 == 0.0 {
        return (q - a).norm();
    }
    let t = ((q - a) * ab.conj()).re / l2;
    let t = t.clamp(0.0, 1.0);
    (q - (a + ab * t)).norm()
}

/// Settings shared by the discretization routines.
#[derive(Clone, Copy, Debug)]
struct RuleSettings {
    tol: f64,
    scale: f64,
}

fn principal_log(z: Complex64) -> Complex64 {
    z.ln()
}

/// a/b without the underflow of |b|² for tiny b.
fn ratio(a: Complex64, b: Complex64) -> Complex64 {
    let s = b.re.abs().max(b.im.abs());
    (a / s) / (b / s)
}

/// Discretize one contour for the variable whose fixed factors are `factors`.
/// `obstacles` holds extra points (other variables' positions) to keep clear of.
fn build_rule(contour: &Contour, factors: &[LinearFactor], obstacles: &[Obstacle], settings: RuleSettings) -> Result<Vec<BranchRule>> {
    let tiny = 1e-13 * settings.scale;
    let roots: Vec<Complex64> = factors.iter().map(|f| f.root()).collect();
    let mut all_obstacles: Vec<Obstacle> = roots.iter().map(|&r| Obstacle { point: r, cone: None }).collect();
    all_obstacles.extend_from_slice(obstacles);

    if factors.iter().any(|f| f.c1 == Complex64::new(0.0, 0.0)) {
        return Err(ContourError::Dimension("factor with zero linear coefficient".into()));
    }

    let mut rules = Vec::with_capacity(contour.branches.len());
    for (chain, sign) in &contour.branches {
        let start = chain.start().ok_or_else(|| ContourError::InvalidLoop("empty chain".into()))?;
        if (start - contour.base).norm() > 1e-12 * settings.scale {
            return Err(ContourError::InvalidLoop(format!("chain starts at {start}, not at the base point {}", contour.base)));
        }
        let end = chain.end().unwrap();
        let closed = (end - contour.base).norm() <= 1e-12 * settings.scale;
        let mut end_root: Option<usize> = None;
        if !closed {
            let mut total = 0.0;
            for (i, f) in factors.iter().enumerate() {
                if (f.root() - end).norm() <= 1e-12 * settings.scale {
                    total += f.exponent;
                    if end_root.is_none() {
                        end_root = Some(i);
                    }
                }
            }
            match end_root {
                None => return Err(ContourError::NotClosed(end)),
                Some(_) if total <= -1.0 => return Err(ContourError::NonIntegrable { point: end, exponent: total }),
                _ => {}
            }
        }

        let mut panels = Vec::new();
        let npieces = chain.pieces.len();
        for (pi, piece) in chain.pieces.iter().enumerate() {
            let is_last = pi + 1 == npieces;
            let initial = match *piece {
                Primitive::Segment { from, to } => {
                    if is_last && !closed {
                        let r = end_root.unwrap();
                        let root = factors[r].root();
                        Panel::EndSeg { anchor: root, off0: from - root, root: r }
                    } else {
                        Panel::Seg { anchor: from, off0: Complex64::new(0.0, 0.0), off1: to - from }
                    }
                }
                Primitive::Arc { center, radius, theta0, sweep } => {
                    if is_last && !closed {
                        return Err(ContourError::InvalidLoop("open chains must end with a segment".into()));
                    }
                    Panel::Arc { center, radius, t0: theta0, t1: theta0 + sweep }
                }
            };
            refine(initial, &all_obstacles, tiny, &mut panels)?;
        }

        let mut nodes = Vec::new();
        for panel in &panels {
            emit_nodes(panel, factors, *sign, settings, &mut nodes)?;
        }
        rules.push(BranchRule { nodes });
    }
    Ok(rules)
}

fn refine(panel: Panel, obstacles: &[Obstacle], tiny: f64, out: &mut Vec<Panel>) -> Result<()> {
    let len = panel.length();
    let mut ok = true;
    for ob in obstacles {
        let (skip, is_end) = match panel {
            Panel::EndSeg { anchor, .. } => {
                let at_end = (ob.point - anchor).norm() <= tiny;
                (at_end || ob.cone == Some(anchor), true)
            }
            _ => (false, false),
        };
        if skip {
            continue;
        }
        let d = panel.distance(ob.point);
        if d <= tiny && ob.cone.is_none() {
            return Err(ContourError::SingularPath(ob.point));
        }
        if d < CLEARANCE_RATIO * len {
            ok = false;
            if !is_end && len < tiny {
                return Err(ContourError::SingularPath(ob.point));
            }
            break;
        }
    }
    if ok {
        out.push(panel);
        return Ok(());
    }
    if len < tiny {
        return Err(ContourError::SingularPath(panel_start(&panel)));
    }
    let (a, b) = panel.split();
    refine(a, obstacles, tiny, out)?;
    refine(b, obstacles, tiny, out)
}

fn panel_start(p: &Panel) -> Complex64 {
    match *p {
        Panel::Seg { anchor, off0, .. } => anchor + off0,
        Panel::EndSeg { anchor, off0, .. } => anchor + off0,
        Panel::Arc { center, radius, t0, .. } => center + Complex64::from_polar(radius, t0),
    }
}

/// Fixed-factor log-magnitude at a node (used for adaptivity only; the
/// branch is irrelevant for |f|).
fn fixed_abs(factors: &[LinearFactor], anchor: Complex64, offset: Complex64, root: Option<usize>) -> f64 {
    let mut s = 0.0;
    for (i, f) in factors.iter().enumerate() {
        let v = f.eval(anchor, offset, root == Some(i));
        s += f.exponent * v.norm().ln();
    }
    s.exp()
}

fn emit_nodes(panel: &Panel, factors: &[LinearFactor], sign: f64, settings: RuleSettings, out: &mut Vec<Node>) -> Result<()> {
    match *panel {
        Panel::EndSeg { anchor, off0, root } => {
            // Choose the tanh-sinh step from the fixed-factor magnitude.
            let mut h = 0.25;
            let mut prev: Option<f64> = None;
            let mut chosen = quad::tanh_sinh_nodes(h);
            for _ in 0..7 {
                let nodes = quad::tanh_sinh_nodes(h);
                let s: f64 = nodes.iter().map(|n| n.weight * fixed_abs(factors, anchor, off0 * n.wc, Some(root))).sum::<f64>() * off0.norm();
                chosen = nodes;
                if let Some(p) = prev {
                    if (s - p).abs() <= settings.tol * s.abs().max(1e-300) {
                        break;
                    }
                }
                prev = Some(s);
                h *= 0.5;
            }
            // Traverse from the panel start (w = 0 side at the far end) to the endpoint.
            // Position: anchor + off0·(1 − w); dz/dw = −off0.
            let mut ordered: Vec<TsNode> = chosen;
            ordered.sort_by(|a, b| a.w.partial_cmp(&b.w).unwrap());
            for n in ordered {
                out.push(Node { anchor, offset: off0 * n.wc, weight: -off0 * (n.weight * sign), anchored_root: Some(root) });
            }
        }
        _ => {
            // GK15, bisected while the embedded error estimate on the fixed factors is too large.
            let nodes = panel.gk_nodes();
            let mut k = 0.0;
            let mut g = 0.0;
            let mut absint = 0.0;
            for ((anchor, off, dre, dim), (_, wk, wg)) in nodes.iter().zip(quad::gk15_nodes()) {
                let dz = Complex64::new(*dre, *dim).norm();
                let v = fixed_abs(factors, *anchor, *off, None) * dz;
                k += wk * v;
                g += wg * v;
                absint += wk * v;
            }
            let err = (k - g).abs();
            if err > settings.tol * absint && panel.length() > 1e-10 * settings.scale {
                let (a, b) = panel.split();
                emit_nodes(&a, factors, sign, settings, out)?;
                emit_nodes(&b, factors, sign, settings, out)?;
                return Ok(());
            }
            for ((anchor, off, dre, dim), (_, wk, _)) in nodes.into_iter().zip(quad::gk15_nodes()) {
                out.push(Node { anchor, offset: off, weight: Complex64::new(dre, dim) * (wk * sign), anchored_root: None });
            }
        }
    }
    Ok(())
}

/// Fixed-factor log sums along each branch, continued from the principal
/// branch at the base point.
fn fixed_logs(rule: &[BranchRule], factors: &[LinearFactor], base: Complex64) -> Vec<Vec<Complex64>> {
    let base_vals: Vec<Complex64> = factors.iter().map(|f| f.c0 + f.c1 * base).collect();
    let base_logs: Vec<Complex64> = base_vals.iter().map(|&v| principal_log(v)).collect();
    rule.iter()
        .map(|br| {
            let mut vals = base_vals.clone();
            let mut logs = base_logs.clone();
            let mut out = Vec::with_capacity(br.nodes.len());
            for node in &br.nodes {
                let mut total = Complex64::new(0.0, 0.0);
                for (i, f) in factors.iter().enumerate() {
                    let v = f.eval(node.anchor, node.offset, node.anchored_root == Some(i));
                    logs[i] += principal_log(ratio(v, vals[i]));
                    vals[i] = v;
                    total += f.exponent * logs[i];
                }
                out.push(total);
            }
            out
        })
        .collect()
}

fn contour_scale(contour: &Contour, factors: &[LinearFactor]) -> f64 {
    let mut s = contour.length();
    for f in factors {
        s = s.max((f.root() - contour.base).norm());
    }
    s.max(1e-300)
}

/// ∫ f(t) dt along the contour, with the branch of f continued from the
/// principal determination at the base point.
pub fn integrate_branch_tracked(f: &MultiPowerIntegrand, contour: &Contour, tol: f64) -> Result<Complex64> {
    if !(tol > 0.0) {
        return Err(ContourError::InvalidLoop("tolerance must be positive".into()));
    }
    let settings = RuleSettings { tol, scale: contour_scale(contour, &f.factors) };
    for fac in &f.factors {
        if (fac.c0 + fac.c1 * contour.base).norm() <= 1e-14 * settings.scale * fac.c1.norm() {
            return Err(ContourError::SingularPath(fac.root()));
        }
    }
    let rule = build_rule(contour, &f.factors, &[], settings)?;
    let logs = fixed_logs(&rule, &f.factors, contour.base);
    let pref = f.prefactor * Complex64::from_polar(1.0, f.base_phase);
    let mut sum = Complex64::new(0.0, 0.0);
    for (br, lg) in rule.iter().zip(&logs) {
        for (node, l) in br.nodes.iter().zip(lg) {
            sum += node.weight * l.exp();
        }
    }
    Ok(pref * sum)
}

/// A pair factor (sign·(u_i − u_k))^exponent between integration variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFactor {
    pub i: usize,
    pub k: usize,
    pub sign: f64,
    pub exponent: f64,
}

/// A multivariate integrand ∏ᵢ∏ⱼ Lᵢⱼ(uᵢ)^{eᵢⱼ} ∏ pair factors × prefactor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductIntegrand {
    pub point_factors: Vec<Vec<LinearFactor>>,
    pub pair_factors: Vec<PairFactor>,
    pub prefactor: Complex64,
}

impl ProductIntegrand {
    pub fn nvars(&self) -> usize {
        self.point_factors.len()
    }
}

/// A product cycle: one contour per integration variable.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductCycle {
    pub contours: Vec<Contour>,
}

struct Level<'a> {
    rule: &'a [BranchRule],
    fixed: Vec<Vec<Complex64>>,
    base: Complex64,
    /// (pair index, other variable, sign applied so that value = sign·(u_this − u_other))
    pairs: &'a [(usize, usize, f64)],
}

/// Quadrature rules for every factor of a product cycle, built once and
/// reusable for integrands whose singular points move by much less than
/// the loop clearances (finite-difference stencils in the marked points).
#[derive(Clone, Debug)]
pub struct PreparedCycle {
    rules: Vec<Vec<BranchRule>>,
    bases: Vec<Complex64>,
    pairs: Vec<Vec<(usize, usize, f64)>>,
    pair_shape: Vec<(usize, usize, f64)>,
    scale: f64,
}

fn pair_value(sign: f64, this: (Complex64, Complex64), other: (Complex64, Complex64)) -> Complex64 {
    sign * ((this.0 - other.0) + (this.1 - other.1))
}

/// Minimum distance between sampled points of two contours (both endpoints
/// shared by open chains are ignored).
/// Smallest distance between samples of `a` and `b`, or `None` when the
/// paths stay apart. Near a shared endpoint the paths meet by design, so
/// there they only need to leave it in different directions.
fn contour_separation(a: &Contour, b: &Contour, step: f64, shared: &[Complex64]) -> Option<f64> {
    let pa = a.sample(step);
    let pb = b.sample(step);
    let mut worst = None;
    for &p in &pa {
        for &q in &pb {
            let d = (p - q).norm();
            let near = shared.iter().find(|&&s| (p - s).norm() <= 8.0 * step && (q - s).norm() <= 8.0 * step);
            let bad = match near {
                Some(&s) => {
                    let r = (p - s).norm().max((q - s).norm());
                    r > 1e-9 * step && d <= 0.05 * r
                }
                None => d <= 2.0 * step,
            };
            if bad && worst.map_or(true, |w| d < w) {
                worst = Some(d);
            }
        }
    }
    worst
}

fn open_ends(c: &Contour) -> Vec<Complex64> {
    c.branches
        .iter()
        .filter_map(|(ch, _)| ch.end())
        .filter(|e| (*e - c.base).norm() > 1e-12 * (1.0 + c.base.norm()))
        .collect()
}

/// Nested integral of a product integrand over a product cycle; the first
/// variable is the outermost. Outer nodes are evaluated in parallel with a
/// fixed-order reduction, so the result does not depend on the thread count.
pub fn integrate_product_cycle(phi: &ProductIntegrand, cycle: &ProductCycle, tol: f64) -> Result<Complex64> {
    PreparedCycle::new(phi, cycle, tol)?.integrate(phi)
}

impl PreparedCycle {
    /// Builds the rules for `cycle`, adapted to the singular points of `phi`.
    pub fn new(phi: &ProductIntegrand, cycle: &ProductCycle, tol: f64) -> Result<Self> {
        let m = phi.nvars();
        if cycle.contours.len() != m {
            return Err(ContourError::Dimension(format!("{} variables but {} contours", m, cycle.contours.len())));
        }
        if !(tol > 0.0) {
            return Err(ContourError::InvalidLoop("tolerance must be positive".into()));
        }
        let mut scale: f64 = 0.0;
        for (c, f) in cycle.contours.iter().zip(&phi.point_factors) {
            scale = scale.max(contour_scale(c, f));
        }
        let settings = RuleSettings { tol, scale };

        // Factor paths must be pairwise disjoint (open chains may share endpoints).
        for a in 0..m {
            for b in a + 1..m {
                let ea = open_ends(&cycle.contours[a]);
                let eb = open_ends(&cycle.contours[b]);
                let shared: Vec<Complex64> = ea.iter().filter(|p| eb.iter().any(|q| (*p - q).norm() <= 1e-12 * scale)).cloned().collect();
                let step = 1e-3 * scale.max(1e-300);
                let step = step.min(cycle.contours[a].length() / 200.0).min(cycle.contours[b].length() / 200.0);
                if let Some(d) = contour_separation(&cycle.contours[a], &cycle.contours[b], step, &shared) {
                    return Err(ContourError::IntersectingPaths(d));
                }
            }
        }

        let bases: Vec<Complex64> = cycle.contours.iter().map(|c| c.base).collect();
        let mut rules: Vec<Vec<BranchRule>> = Vec::with_capacity(m);
        let mut all_pairs = Vec::with_capacity(m);
        for v in 0..m {
            let factors = &phi.point_factors[v];
            let mut obstacles = Vec::new();
            let mut pairs = Vec::new();
            for (pi, pf) in phi.pair_factors.iter().enumerate() {
                let (other, sign) = if pf.i == v {
                    (pf.k, pf.sign)
                } else if pf.k == v {
                    (pf.i, -pf.sign)
                } else {
                    continue;
                };
                if other >= m || other == v {
                    return Err(ContourError::Dimension(format!("pair factor ({}, {}) out of range", pf.i, pf.k)));
                }
                pairs.push((pi, other, sign));
                if other < v {
                    let cones = open_ends(&cycle.contours[other]);
                    for br in &rules[other] {
                        for node in &br.nodes {
                            let p = node.pos();
                            let cone = cones.iter().find(|&&e| (p - e).norm() < 0.5 * (bases[other] - e).norm()).copied();
                            obstacles.push(Obstacle { point: p, cone });
                        }
                    }
                }
                obstacles.push(Obstacle { point: bases[other], cone: None });
            }
            rules.push(build_rule(&cycle.contours[v], factors, &obstacles, settings)?);
            all_pairs.push(pairs);
        }
        let pair_shape = phi.pair_factors.iter().map(|p| (p.i, p.k, p.sign)).collect();
        let prepared = Self { rules, bases, pairs: all_pairs, pair_shape, scale };
        prepared.check_compatible(phi)?;
        Ok(prepared)
    }

    /// Number of quadrature nodes per variable.
    pub fn node_counts(&self) -> Vec<usize> {
        self.rules.iter().map(|r| r.iter().map(|b| b.nodes.len()).sum()).collect()
    }

    fn check_compatible(&self, phi: &ProductIntegrand) -> Result<()> {
        if phi.nvars() != self.rules.len() {
            return Err(ContourError::Dimension(format!("{} variables, rules prepared for {}", phi.nvars(), self.rules.len())));
        }
        let shape: Vec<(usize, usize, f64)> = phi.pair_factors.iter().map(|p| (p.i, p.k, p.sign)).collect();
        if shape != self.pair_shape {
            return Err(ContourError::Dimension("pair factor structure differs from the prepared one".into()));
        }
        for (v, factors) in phi.point_factors.iter().enumerate() {
            for fac in factors {
                if (fac.c0 + fac.c1 * self.bases[v]).norm() <= 1e-14 * self.scale * fac.c1.norm() {
                    return Err(ContourError::SingularPath(fac.root()));
                }
            }
            for br in &self.rules[v] {
                for node in &br.nodes {
                    if let Some(r) = node.anchored_root {
                        let f = factors.get(r).ok_or_else(|| ContourError::Dimension("factor list changed".into()))?;
                        if (f.root() - node.anchor).norm() > 1e-13 * self.scale {
                            return Err(ContourError::InvalidLoop("open chain endpoint no longer at its singular point".into()));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Integrates `phi` with the prepared rules. The singular points of `phi`
    /// may differ from those used to build the rules, but must not cross the
    /// paths; open chains must still end at their singular points.
    pub fn integrate(&self, phi: &ProductIntegrand) -> Result<Complex64> {
        self.check_compatible(phi)?;
        let m = phi.nvars();
        let zero = Complex64::new(0.0, 0.0);
        if m == 0 {
            return Ok(phi.prefactor);
        }
        let levels: Vec<Level> = (0..m)
            .map(|v| Level {
                rule: &self.rules[v],
                fixed: fixed_logs(&self.rules[v], &phi.point_factors[v], self.bases[v]),
                base: self.bases[v],
                pairs: &self.pairs[v],
            })
            .collect();
        // Initial pair logs: all variables at their base points.
        let mut init_logs = vec![zero; phi.pair_factors.len()];
        let mut init_vals = vec![zero; phi.pair_factors.len()];
        for (pi, pf) in phi.pair_factors.iter().enumerate() {
            let v = pf.sign * (self.bases[pf.i] - self.bases[pf.k]);
            if v.norm() == 0.0 {
                return Err(ContourError::IntersectingPaths(0.0));
            }
            init_vals[pi] = v;
            init_logs[pi] = principal_log(v);
        }
        let positions: Vec<(Complex64, Complex64)> = self.bases.iter().map(|&b| (b, zero)).collect();
        let state = State { logs: init_logs, vals: init_vals, pos: positions };
        let total = eval_level(0, phi, &levels, state, zero, true);
        Ok(phi.prefactor * total)
    }
}

#[derive(Clone)]
struct State {
    logs: Vec<Complex64>,
    vals: Vec<Complex64>,
    pos: Vec<(Complex64, Complex64)>,
}

fn eval_level(v: usize, phi: &ProductIntegrand, levels: &[Level], state: State, acc: Complex64, parallel: bool) -> Complex64 {
    let level = &levels[v];
    let last = v + 1 == levels.len();
    let mut total = Complex64::new(0.0, 0.0);
    for (br, fixed) in level.rule.iter().zip(&level.fixed) {
        // Walk the branch from the base, collecting the state at every node.
        let mut st = state.clone();
        st.pos[v] = (level.base, Complex64::new(0.0, 0.0));
        let mut per_node: Vec<(Complex64, Complex64, Option<State>)> = Vec::with_capacity(br.nodes.len());
        for (node, fl) in br.nodes.iter().zip(fixed) {
            let here = (node.anchor, node.offset);
            let mut pair_sum = Complex64::new(0.0, 0.0);
            for &(pi, other, sign) in level.pairs {
                let val = pair_value(sign, here, st.pos[other]);
                st.logs[pi] += principal_log(ratio(val, st.vals[pi]));
                st.vals[pi] = val;
            }
            st.pos[v] = here;
            if last {
                for (pi, pf) in phi.pair_factors.iter().enumerate() {
                    pair_sum += pf.exponent * st.logs[pi];
                }
                per_node.push((node.weight, acc + fl + pair_sum, None));
            } else {
                per_node.push((node.weight, acc + fl, Some(st.clone())));
            }
        }
        let contributions: Vec<Complex64> = if last {
            per_node.iter().map(|(w, l, _)| w * l.exp()).collect()
        } else if parallel {
            per_node
                .into_par_iter()
                .map(|(w, l, s)| w * eval_level(v + 1, phi, levels, s.unwrap(), l, false))
                .collect()
        } else {
            per_node
                .into_iter()
                .map(|(w, l, s)| w * eval_level(v + 1, phi, levels, s.unwrap(), l, false))
                .collect()
        };
        for c in contributions {
            total += c;
        }
    }
    total
}

/// Pochhammer loop around (a, b) with circles of radius `clearance` and the
/// base point at a + (b−a)/2 + i·clearance.
pub fn pochhammer_loop(a: f64, b: f64, clearance: f64) -> Result<Contour> {
    pochhammer_loop_with_height(a, b, clearance, clearance)
}

/// Pochhammer loop with the base point raised to height `height ≥ clearance`
/// above the midpoint. The path is the commutator of the simple loops around
/// a and b, traversed as: around b (counterclockwise), around a
/// (counterclockwise), around b (clockwise), around a (clockwise).
pub fn pochhammer_loop_with_height(a: f64, b: f64, clearance: f64, height: f64) -> Result<Contour> {
    if !(a < b) {
        return Err(ContourError::InvalidLoop(format!("need a < b, got ({a}, {b})")));
    }
    if !(clearance > 0.0) || clearance >= 0.5 * (b - a) {
        return Err(ContourError::InvalidLoop(format!("clearance {clearance} must lie in (0, (b-a)/2 = {})", 0.5 * (b - a))));
    }
    if !(height >= clearance) {
        return Err(ContourError::InvalidLoop(format!("height {height} below clearance {clearance}")));
    }
    let base = Complex64::new(0.5 * (a + b), height);
    let mut pieces = Vec::new();
    let mut lasso = |x: f64, ccw: bool| {
        let top = Complex64::new(x, height);
        let near = Complex64::new(x, clearance);
        pieces.push(Primitive::segment(base, top));
        pieces.push(Primitive::segment(top, near));
        let sweep = if ccw { 2.0 * PI } else { -2.0 * PI };
        pieces.push(Primitive::arc(Complex64::new(x, 0.0), clearance, FRAC_PI_2, sweep));
        pieces.push(Primitive::segment(near, top));
        pieces.push(Primitive::segment(top, base));
    };
    lasso(b, true);
    lasso(a, true);
    lasso(b, false);
    lasso(a, false);
    Ok(Contour::closed(Chain::new(pieces)))
}

/// Simple clockwise loop around the segment [a, b] at distance `clearance`,
/// based at the point above the midpoint.
pub fn segment_loop(a: f64, b: f64, clearance: f64) -> Result<Contour> {
    if !(a < b) || !(clearance > 0.0) {
        return Err(ContourError::InvalidLoop(format!("bad segment loop ({a}, {b}, {clearance})")));
    }
    let m = Complex64::new(0.5 * (a + b), clearance);
    let pieces = vec![
        Primitive::segment(m, Complex64::new(b, clearance)),
        Primitive::arc(Complex64::new(b, 0.0), clearance, FRAC_PI_2, -PI),
        Primitive::segment(Complex64::new(b, -clearance), Complex64::new(a, -clearance)),
        Primitive::arc(Complex64::new(a, 0.0), clearance, -FRAC_PI_2, -PI),
        Primitive::segment(Complex64::new(a, clearance), m),
    ];
    Ok(Contour::closed(Chain::new(pieces)))
}

/// Winding number of a contour (as a closed cycle) around `q`.
pub fn winding_number(contour: &Contour, q: Complex64) -> f64 {
    let mut total = 0.0;
    for (ch, s) in &contour.branches {
        let pts = ch.sample(ch.length() / 4000.0);
        let mut acc = 0.0;
        for w in pts.windows(2) {
            acc += ((w[1] - q) / (w[0] - q)).arg();
        }
        total += s * acc;
    }
    total / (2.0 * PI)
}
