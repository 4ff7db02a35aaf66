//! Monte Carlo for the UST event whose probability Fomin's identity gives as
//! det H(yᵢ, xⱼ): the branches from y₁, …, yₙ reach the wired boundary at
//! x₁, …, xₙ respectively without meeting in the bulk.

use crate::domain::{LatticeDomain, LatticeKind};
use crate::error::{LatticeError, Result};
use crate::harmonic::harmonic_matrix;
use crate::rng::{chunks, replica_rng};
use crate::wilson::{domain_graph, walk_until};
use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

fn check(dom: &LatticeDomain, x: &[usize], y: &[usize]) -> Result<()> {
    if dom.kind != LatticeKind::Square {
        return Err(LatticeError::WrongLattice("square"));
    }
    if x.is_empty() || x.len() != y.len() {
        return Err(LatticeError::Domain(format!("need equal non-empty x and y, got {} and {}", x.len(), y.len())));
    }
    if let Some(&b) = x.iter().find(|&&b| b >= dom.boundary.len()) {
        return Err(LatticeError::Site(b));
    }
    if let Some(&v) = y.iter().find(|&&v| v >= dom.n_sites()) {
        return Err(LatticeError::Site(v));
    }
    if let Some(&v) = y.iter().find(|&&v| dom.boundary_neighbors[v].is_empty()) {
        return Err(LatticeError::Domain(format!("y site {v} is not adjacent to the boundary")));
    }
    // x₁, …, xₙ, yₙ, …, y₁ must wind once counterclockwise.
    let params: Vec<f64> =
        x.iter().map(|&b| dom.boundary[b].param).chain(y.iter().rev().map(|&v| dom.site_param(v))).collect();
    let m = params.len();
    let mut turn = 0.0;
    for k in 0..m {
        let gap = (params[(k + 1) % m] - params[k]).rem_euclid(1.0);
        if gap <= 0.0 {
            return Err(LatticeError::Ordering);
        }
        turn += gap;
    }
    if (turn - 1.0).abs() > 1e-9 {
        return Err(LatticeError::Ordering);
    }
    Ok(())
}

/// Boundary site nearest to each x parameter, and the interior neighbour of
/// the boundary site nearest to each y parameter (normalized arclength).
pub fn fomin_sites(dom: &LatticeDomain, x: &[f64], y: &[f64]) -> Result<(Vec<usize>, Vec<usize>)> {
    let xs = x.iter().map(|&s| dom.boundary_near(s)).collect();
    let ys = y
        .iter()
        .map(|&s| {
            let b = dom.boundary_near(s);
            (0..dom.n_sites())
                .find(|&v| dom.boundary_neighbors[v].contains(&b))
                .ok_or_else(|| LatticeError::Domain(format!("boundary site {b} has no interior neighbour")))
        })
        .collect::<Result<_>>()?;
    Ok((xs, ys))
}

struct Scratch {
    next: Vec<usize>,
    /// Sample stamp marking interior vertices already on a branch.
    mark: Vec<u64>,
}

fn sample_event<R: Rng>(
    dom: &LatticeDomain,
    adj: &[Vec<usize>],
    x: &[usize],
    y: &[usize],
    stamp: u64,
    s: &mut Scratch,
    rng: &mut R,
) -> bool {
    let n = dom.n_sites();
    for (i, &yi) in y.iter().enumerate() {
        if s.mark[yi] == stamp {
            return false;
        }
        let end = {
            let mark = &s.mark;
            walk_until(adj, yi, |u| u >= n || mark[u] == stamp, &mut s.next, rng)
        };
        // Meeting an earlier branch before the boundary is a bulk branch point.
        if end < n || end - n != x[i] {
            return false;
        }
        let mut cur = yi;
        while cur < n {
            s.mark[cur] = stamp;
            cur = s.next[cur];
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FominEstimate {
    pub n_samples: u64,
    pub count: u64,
    pub frequency: f64,
    pub stderr: f64,
}

const CHUNK: u64 = 256;

/// Frequency of the event over `n_samples` wired-boundary USTs. Only the
/// branches from the yᵢ are sampled (Wilson's algorithm started at y₁, …, yₙ
/// in order), which determines the event.
pub fn fomin_event_estimate(
    dom: &LatticeDomain,
    x: &[usize],
    y: &[usize],
    n_samples: u64,
    seed: u64,
) -> Result<FominEstimate> {
    check(dom, x, y)?;
    if n_samples == 0 {
        return Err(LatticeError::NoSamples);
    }
    let adj = domain_graph(dom);
    let count: u64 = chunks(n_samples, CHUNK)
        .into_par_iter()
        .map(|range| {
            let mut s = Scratch { next: vec![usize::MAX; adj.len()], mark: vec![u64::MAX; dom.n_sites()] };
            range.filter(|&i| sample_event(dom, &adj, x, y, i, &mut s, &mut replica_rng(seed, i))).count() as u64
        })
        .sum();
    let f = count as f64 / n_samples as f64;
    Ok(FominEstimate { n_samples, count, frequency: f, stderr: (f * (1.0 - f) / n_samples as f64).sqrt() })
}

/// Exact discrete side of the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteFomin {
    /// H(yᵢ, xⱼ).
    pub matrix: Vec<Vec<f64>>,
    pub determinant: f64,
    /// det H / ∏ H(yᵢ, xᵢ), the discrete analogue of the continuum density.
    pub normalized: f64,
}

pub fn fomin_discrete(dom: &LatticeDomain, x: &[usize], y: &[usize]) -> Result<DiscreteFomin> {
    check(dom, x, y)?;
    let matrix = harmonic_matrix(dom, y, x)?;
    let n = x.len();
    let determinant = DMatrix::from_fn(n, n, |i, j| matrix[i][j]).determinant();
    let diag: f64 = (0..n).map(|i| matrix[i][i]).product();
    Ok(DiscreteFomin { normalized: determinant / diag, matrix, determinant })
}
