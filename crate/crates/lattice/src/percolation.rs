//! Critical site percolation on the triangular lattice with alternating
//! blue/yellow boundary arcs.

use crate::domain::{LatticeDomain, LatticeKind};
use crate::error::{LatticeError, Result};
use crate::rng::{chunks, replica_rng};
use rand::RngCore;
use rayon::prelude::*;
use serde::Serialize;
use sle_core::pairings::{enumerate_noncrossing_pairings, pairing_to_partition, NonCrossingPartition};
use std::collections::HashMap;

/// Arc k (0-based) is blue when k is even, i.e. the odd edges e₁, e₃, … are blue.
pub fn arc_is_blue(k: usize) -> bool {
    k % 2 == 0
}

/// Arc connectivity of one configuration.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventOutcome {
    /// connectivity[i][j]: arcs i and j have the same colour and are joined by
    /// a cluster of that colour (true on the diagonal).
    pub connectivity: Vec<Vec<bool>>,
    /// Blocks of blue edges, labelled by their odd edge index.
    pub partition: NonCrossingPartition,
}

/// Union by rank with path halving. Ranks bound tree heights, and `attach`
/// never increases a height, so finds stay O(log n) at worst.
#[derive(Clone)]
struct UnionFind {
    parent: Vec<u32>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn reset(&mut self, n: usize) {
        self.parent.clear();
        self.parent.extend(0..n as u32);
        self.rank.clear();
        self.rank.resize(n, 0);
    }

    /// Joins a fresh singleton `v` to the tree of `u` by sharing u's parent,
    /// so v is no deeper than u.
    fn attach(&mut self, v: u32, u: u32) {
        self.parent[v as usize] = self.parent[u as usize];
    }

    fn find(&mut self, mut v: u32) -> u32 {
        while self.parent[v as usize] != v {
            let g = self.parent[self.parent[v as usize] as usize];
            self.parent[v as usize] = g;
            v = g;
        }
        v
    }

    fn union(&mut self, a: u32, b: u32) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (ka, kb) = (self.rank[ra as usize], self.rank[rb as usize]);
            if ka < kb {
                self.parent[ra as usize] = rb;
            } else {
                self.parent[rb as usize] = ra;
                if ka == kb {
                    self.rank[ra as usize] += 1;
                }
            }
        }
    }
}

/// Precomputed edge lists plus scratch buffers for repeated sampling.
#[derive(Clone)]
pub struct PercolationSampler<'a> {
    dom: &'a LatticeDomain,
    /// Left, down and down-right neighbours of each site (0 if absent).
    back: Vec<[u32; 3]>,
    /// Bit i: neighbour i of `back` exists.
    present: Vec<u8>,
    arc_links: Vec<(u32, u32)>,
    colors: Vec<u64>,
    uf: UnionFind,
    events: HashMap<NonCrossingPartition, usize>,
    partitions: Vec<NonCrossingPartition>,
}

impl<'a> PercolationSampler<'a> {
    pub fn new(dom: &'a LatticeDomain) -> Result<Self> {
        if dom.kind != LatticeKind::Triangular {
            return Err(LatticeError::WrongLattice("triangular"));
        }
        if dom.marks.len() < 2 {
            return Err(LatticeError::Domain("percolation needs 2n ≥ 2 marks".into()));
        }
        let mut back = Vec::with_capacity(dom.n_sites());
        let mut present = Vec::with_capacity(dom.n_sites());
        let mut arc_links = Vec::new();
        for (v, c) in dom.coords.iter().enumerate() {
            // Left, down and down-right neighbours in axial coordinates; each
            // is adjacent to the next, and all precede v in row-major order.
            let b = [[c[0] - 1, c[1]], [c[0], c[1] - 1], [c[0] + 1, c[1] - 1]]
                .map(|d| dom.interior_at(d).map_or(NONE, |u| u as u32));
            if b.iter().any(|&u| u != NONE && u as usize >= v) {
                return Err(LatticeError::Domain("site ordering is not row-major".into()));
            }
            present.push((0..3).filter(|&i| b[i] != NONE).fold(0u8, |m, i| m | 1 << i));
            back.push(b.map(|u| if u == NONE { 0 } else { u }));
            let mut arcs: Vec<usize> = dom.boundary_neighbors[v].iter().map(|&b| dom.boundary[b].arc).collect();
            arcs.sort_unstable();
            arcs.dedup();
            arc_links.extend(arcs.into_iter().map(|a| (v as u32, a as u32)));
        }
        let partitions = event_partitions(dom.n_pairs())?;
        let events = partitions.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        Ok(Self {
            dom,
            back,
            present,
            arc_links,
            colors: vec![0; dom.n_sites().div_ceil(64)],
            uf: UnionFind { parent: Vec::new(), rank: Vec::new() },
            events,
            partitions,
        })
    }

    /// Elementary events in the order used by [`EventEstimates`].
    pub fn partitions(&self) -> &[NonCrossingPartition] {
        &self.partitions
    }

    fn bit(&self, v: u32) -> u32 {
        (self.colors[(v / 64) as usize] >> (v % 64) & 1) as u32
    }

    fn blue(&self, v: u32) -> bool {
        self.colors[(v / 64) as usize] >> (v % 64) & 1 == 1
    }

    fn fill(&mut self, rng: &mut impl RngCore) {
        let n = self.dom.n_sites() as u32;
        for w in &mut self.colors {
            *w = rng.next_u64();
        }
        self.uf.reset(n as usize + self.dom.n_arcs());
        for v in 0..n {
            let [a, b, d] = self.back[v as usize];
            // Bit i set: neighbour i exists and matches v's colour.
            let c = if self.blue(v) { 7 } else { 0 };
            let bits = self.bit(a) | self.bit(b) << 1 | self.bit(d) << 2;
            let same = !(bits ^ c) & self.present[v as usize] as u32;
            // Drop neighbours whose same-coloured predecessor (adjacent to
            // them) already joins them to v.
            match same & !(same << 1) {
                0 => {}
                1 => self.uf.attach(v, a),
                2 => self.uf.attach(v, b),
                4 => self.uf.attach(v, d),
                _ => {
                    self.uf.attach(v, a);
                    self.uf.union(v, d);
                }
            }
        }
        for i in 0..self.arc_links.len() {
            let (v, k) = self.arc_links[i];
            if self.blue(v) == arc_is_blue(k as usize) {
                self.uf.union(v, n + k);
            }
        }
    }

    /// Samples one configuration and returns its arc connectivity. `index`
    /// only labels errors.
    pub fn sample(&mut self, rng: &mut impl RngCore, index: u64) -> Result<EventOutcome> {
        self.fill(rng);
        let n = self.dom.n_sites() as u32;
        let arcs = self.dom.n_arcs();
        let roots: Vec<u32> = (0..arcs as u32).map(|k| self.uf.find(n + k)).collect();
        let connectivity = (0..arcs)
            .map(|i| (0..arcs).map(|j| arc_is_blue(i) == arc_is_blue(j) && roots[i] == roots[j]).collect())
            .collect();
        let blocks = |parity: usize| {
            let mut by_root: Vec<(u32, Vec<usize>)> = Vec::new();
            for k in (parity..arcs).step_by(2) {
                // Blue arc k is edge k + 1; yellow arc k is relabelled as k so
                // that the same odd-label check applies.
                let label = if parity == 0 { k + 1 } else { k };
                match by_root.iter_mut().find(|(r, _)| *r == roots[k]) {
                    Some((_, b)) => b.push(label),
                    None => by_root.push((roots[k], vec![label])),
                }
            }
            by_root.into_iter().map(|(_, b)| b).collect::<Vec<_>>()
        };
        let np = self.dom.n_pairs();
        let partition = NonCrossingPartition::new(np, blocks(0)).map_err(|_| LatticeError::Inconsistent(index))?;
        let yellow = NonCrossingPartition::new(np, blocks(1)).map_err(|_| LatticeError::Inconsistent(index))?;
        // Complementary non-crossing partitions have n + 1 blocks in total.
        if partition.blocks().len() + yellow.blocks().len() != np + 1 {
            return Err(LatticeError::Inconsistent(index));
        }
        Ok(EventOutcome { connectivity, partition })
    }

    /// Index of the sampled event in [`Self::partitions`].
    pub fn sample_event(&mut self, rng: &mut impl RngCore, index: u64) -> Result<usize> {
        let out = self.sample(rng, index)?;
        Ok(self.events[&out.partition])
    }
}

/// The C_n elementary events, as blue-edge partitions, ordered like the
/// non-crossing pairings that realize them.
pub fn event_partitions(n: usize) -> Result<Vec<NonCrossingPartition>> {
    enumerate_noncrossing_pairings(n)
        .iter()
        .map(|p| pairing_to_partition(p).map_err(|e| LatticeError::Domain(e.to_string())))
        .collect()
}

/// One configuration drawn from replica 0 of `seed`.
pub fn percolation_event_sample(dom: &LatticeDomain, seed: u64) -> Result<EventOutcome> {
    PercolationSampler::new(dom)?.sample(&mut replica_rng(seed, 0), 0)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventEstimate {
    pub partition: NonCrossingPartition,
    pub count: u64,
    pub frequency: f64,
    /// Binomial standard error √(f(1 − f)/N).
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EventEstimates {
    pub n_samples: u64,
    pub seed: u64,
    pub events: Vec<EventEstimate>,
}

impl EventEstimates {
    pub fn get(&self, p: &NonCrossingPartition) -> Option<&EventEstimate> {
        self.events.iter().find(|e| &e.partition == p)
    }
}

const CHUNK: u64 = 64;
const NONE: u32 = u32::MAX;

/// Frequencies of the elementary events over `n_samples` independent
/// configurations. Sample i uses stream i of `seed`.
pub fn estimate_event_probabilities(dom: &LatticeDomain, n_samples: u64, seed: u64) -> Result<EventEstimates> {
    if n_samples == 0 {
        return Err(LatticeError::NoSamples);
    }
    let template = PercolationSampler::new(dom)?;
    let partitions = template.partitions().to_vec();
    let counts = chunks(n_samples, CHUNK)
        .into_par_iter()
        .map(|range| -> Result<Vec<u64>> {
            let mut s = template.clone();
            let mut c = vec![0u64; partitions.len()];
            for i in range {
                c[s.sample_event(&mut replica_rng(seed, i), i)?] += 1;
            }
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(vec![0u64; partitions.len()], |mut acc, c| {
            acc.iter_mut().zip(c).for_each(|(a, b)| *a += b);
            acc
        });
    let n = n_samples as f64;
    let events = partitions
        .into_iter()
        .zip(counts)
        .map(|(partition, count)| {
            let f = count as f64 / n;
            EventEstimate { partition, count, frequency: f, stderr: (f * (1.0 - f) / n).sqrt() }
        })
        .collect();
    Ok(EventEstimates { n_samples, seed, events })
}
