//! Uniform spanning trees by Wilson's algorithm.

use crate::domain::{LatticeDomain, LatticeKind};
use crate::error::{LatticeError, Result};
use crate::rng::replica_rng;
use rand::Rng;
use std::collections::VecDeque;

/// A spanning tree (forest rooted at the wired roots): `parent[v]` is the
/// next vertex towards the root set, `None` for roots.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanningTree {
    pub parent: Vec<Option<usize>>,
}

impl SpanningTree {
    /// Tree edges as (min, max) pairs, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut e: Vec<(usize, usize)> =
            self.parent.iter().enumerate().filter_map(|(v, p)| p.map(|p| (v.min(p), v.max(p)))).collect();
        e.sort_unstable();
        e
    }

    /// The branch from `v` to the root set, both ends included.
    pub fn branch(&self, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut cur = v;
        while let Some(p) = self.parent[cur] {
            path.push(p);
            cur = p;
        }
        path
    }
}

/// Walks from `start` until `stop` holds, recording the last exit from each
/// vertex in `next`. Returns the vertex where the walk stopped; following
/// `next` from `start` then traces the loop erasure.
pub fn walk_until<R: Rng>(
    adj: &[Vec<usize>],
    start: usize,
    stop: impl Fn(usize) -> bool,
    next: &mut [usize],
    rng: &mut R,
) -> usize {
    let mut cur = start;
    while !stop(cur) {
        let nb = &adj[cur];
        let u = nb[rng.gen_range(0..nb.len())];
        next[cur] = u;
        cur = u;
    }
    cur
}

/// Wilson's algorithm on the graph `adj` with the vertices flagged in
/// `is_root` wired together. Branches are started from vertices in index
/// order.
pub fn wilson_tree<R: Rng>(adj: &[Vec<usize>], is_root: &[bool], rng: &mut R) -> Result<SpanningTree> {
    let n = adj.len();
    if is_root.len() != n || !is_root.iter().any(|&r| r) {
        return Err(LatticeError::Domain("need at least one root".into()));
    }
    let mut seen = is_root.to_vec();
    let mut queue: VecDeque<usize> = (0..n).filter(|&v| is_root[v]).collect();
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(LatticeError::Domain("some vertex cannot reach a root".into()));
    }
    let mut in_tree = is_root.to_vec();
    let mut parent = vec![None; n];
    let mut next = vec![usize::MAX; n];
    for v in 0..n {
        if in_tree[v] {
            continue;
        }
        walk_until(adj, v, |u| in_tree[u], &mut next, rng);
        let mut cur = v;
        while !in_tree[cur] {
            in_tree[cur] = true;
            parent[cur] = Some(next[cur]);
            cur = next[cur];
        }
    }
    Ok(SpanningTree { parent })
}

/// Adjacency of a square-lattice domain with interior sites 0..N followed by
/// boundary sites N..N+B. Boundary sites get their interior neighbours.
pub fn domain_graph(dom: &LatticeDomain) -> Vec<Vec<usize>> {
    let n = dom.n_sites();
    let mut adj: Vec<Vec<usize>> = (0..n)
        .map(|v| dom.neighbors[v].iter().copied().chain(dom.boundary_neighbors[v].iter().map(|&b| n + b)).collect())
        .collect();
    adj.resize(n + dom.boundary.len(), Vec::new());
    for v in 0..n {
        for &b in &dom.boundary_neighbors[v] {
            adj[n + b].push(v);
        }
    }
    adj
}

/// Uniform spanning tree of a square-lattice domain with wired boundary.
/// Vertex numbering follows [`domain_graph`].
pub fn wilson_ust(dom: &LatticeDomain, seed: u64) -> Result<SpanningTree> {
    if dom.kind != LatticeKind::Square {
        return Err(LatticeError::WrongLattice("square"));
    }
    let adj = domain_graph(dom);
    let is_root: Vec<bool> = (0..adj.len()).map(|v| v >= dom.n_sites()).collect();
    wilson_tree(&adj, &is_root, &mut replica_rng(seed, 0))
}

/// The w × h grid graph, vertex (i, j) numbered j·w + i.
pub fn grid_graph(w: usize, h: usize) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); w * h];
    for j in 0..h {
        for i in 0..w {
            let v = j * w + i;
            if i + 1 < w {
                adj[v].push(v + 1);
                adj[v + 1].push(v);
            }
            if j + 1 < h {
                adj[v].push(v + w);
                adj[v + w].push(v);
            }
        }
    }
    adj
}
