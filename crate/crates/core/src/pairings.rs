//! Non-crossing pairings of 2n boundary points and the induced partitions of
//! the blue boundary edges.
//!
//! Points are labelled 1..=2n in counterclockwise order. Edge eₖ joins
//! points k and k+1 (indices mod 2n); the odd edges e₁, e₃, … are blue.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PairingError {
    #[error("catalan({0}) overflows u64")]
    Overflow(u64),
    #[error("not an involution without fixed points on 1..={0}")]
    NotInvolution(usize),
    #[error("pairing is crossing: {a}<{b}<{c}<{d} with {a}↔{c} and {b}↔{d}")]
    Crossing { a: usize, b: usize, c: usize, d: usize },
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
}

/// Catalan number C_n = binomial(2n, n)/(n + 1).
pub fn catalan(n: u64) -> Result<u64, PairingError> {
    let mut c: u128 = 1;
    for k in 0..n {
        let k = k as u128;
        c = c * 2 * (2 * k + 1) / (k + 2);
        if c > u64::MAX as u128 {
            return Err(PairingError::Overflow(n));
        }
    }
    Ok(c as u64)
}

/// A fixed-point-free involution ι on {1, …, 2n}; `map[k-1] = ι(k)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NonCrossingPairing {
    map: Vec<usize>,
}

impl NonCrossingPairing {
    /// Builds a pairing from ι given as a 1-based image vector, checking the invariants.
    pub fn from_map(map: Vec<usize>) -> Result<Self, PairingError> {
        let m = map.len();
        if m == 0 || m % 2 != 0 {
            return Err(PairingError::NotInvolution(m));
        }
        for (i, &j) in map.iter().enumerate() {
            let k = i + 1;
            if j == 0 || j > m || j == k || map[j - 1] != k {
                return Err(PairingError::NotInvolution(m));
            }
        }
        let p = Self { map };
        p.check_noncrossing()?;
        Ok(p)
    }

    /// Builds a pairing from a list of (a, b) pairs.
    pub fn from_pairs(pairs: &[(usize, usize)]) -> Result<Self, PairingError> {
        let m = 2 * pairs.len();
        let mut map = vec![0usize; m];
        for &(a, b) in pairs {
            if a == 0 || b == 0 || a > m || b > m || a == b || map[a - 1] != 0 || map[b - 1] != 0 {
                return Err(PairingError::NotInvolution(m));
            }
            map[a - 1] = b;
            map[b - 1] = a;
        }
        Self::from_map(map)
    }

    fn check_noncrossing(&self) -> Result<(), PairingError> {
        for a in 1..=self.map.len() {
            let c = self.partner(a);
            if c < a {
                continue;
            }
            for b in a + 1..c {
                let d = self.partner(b);
                if d > c {
                    return Err(PairingError::Crossing { a, b, c, d });
                }
            }
        }
        Ok(())
    }

    /// Number of pairs n.
    pub fn n(&self) -> usize {
        self.map.len() / 2
    }

    /// ι(k), 1-based.
    pub fn partner(&self, k: usize) -> usize {
        self.map[k - 1]
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    /// Pairs (a, b) with a < b, sorted by a.
    pub fn pairs(&self) -> Vec<(usize, usize)> {
        (1..=self.map.len()).filter(|&a| a < self.partner(a)).map(|a| (a, self.partner(a))).collect()
    }

    /// The pairing relabelled after removing the pair {k, ι(k)}.
    pub fn without_pair(&self, k: usize) -> Result<Self, PairingError> {
        let j = self.partner(k);
        let keep: Vec<usize> = (1..=self.map.len()).filter(|&i| i != k && i != j).collect();
        let relabel = |i: usize| keep.iter().position(|&x| x == i).unwrap() + 1;
        let pairs: Vec<(usize, usize)> = self.pairs().into_iter().filter(|&(a, _)| a != k && a != j).map(|(a, b)| (relabel(a), relabel(b))).collect();
        Self::from_pairs(&pairs)
    }
}

impl Serialize for NonCrossingPairing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let v: Vec<[usize; 2]> = self.pairs().into_iter().map(|(a, b)| [a, b]).collect();
        v.serialize(s)
    }
}

impl<'de> Deserialize<'de> for NonCrossingPairing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v: Vec<[usize; 2]> = Vec::deserialize(d)?;
        let pairs: Vec<(usize, usize)> = v.into_iter().map(|[a, b]| (a, b)).collect();
        Self::from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// All non-crossing pairings of 2n points, in lexicographic order of (ι(1), ι(2), …).
pub fn enumerate_noncrossing_pairings(n: usize) -> Vec<NonCrossingPairing> {
    fn fill(lo: usize, hi: usize, map: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, rest: &mut Vec<(usize, usize)>) {
        // Pairs the interval [lo, hi] (1-based, even length); intervals still to do are on `rest`.
        if lo > hi {
            if let Some((l, h)) = rest.pop() {
                fill(l, h, map, out, rest);
                rest.push((l, h));
            } else {
                out.push(map.clone());
            }
            return;
        }
        let mut j = lo + 1;
        while j <= hi {
            map[lo - 1] = j;
            map[j - 1] = lo;
            rest.push((j + 1, hi));
            fill(lo + 1, j - 1, map, out, rest);
            rest.pop();
            j += 2;
        }
    }
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut map = vec![0; 2 * n];
    fill(1, 2 * n, &mut map, &mut out, &mut Vec::new());
    out.sort();
    out.into_iter().map(|map| NonCrossingPairing { map }).collect()
}

/// A partition of the blue edges (labelled by their odd edge index) into blocks.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NonCrossingPartition {
    blocks: Vec<Vec<usize>>,
}

impl NonCrossingPartition {
    /// Canonicalizes and validates blocks of odd edge indices for a 2n-gon.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self, PairingError> {
        let mut blocks: Vec<Vec<usize>> = blocks
            .into_iter()
            .map(|mut b| {
                b.sort_unstable();
                b
            })
            .filter(|b| !b.is_empty())
            .collect();
        blocks.sort();
        let mut seen = BTreeSet::new();
        for b in &blocks {
            for &e in b {
                if e == 0 || e > 2 * n || e % 2 == 0 || !seen.insert(e) {
                    return Err(PairingError::InvalidPartition(format!("bad or repeated blue edge {e}")));
                }
            }
        }
        if seen.len() != n {
            return Err(PairingError::InvalidPartition(format!("{} of {} blue edges covered", seen.len(), n)));
        }
        let p = Self { blocks };
        if !p.is_noncrossing() {
            return Err(PairingError::InvalidPartition("blocks cross".into()));
        }
        Ok(p)
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    /// True when no a < b < c < d have a, c in one block and b, d in another.
    pub fn is_noncrossing(&self) -> bool {
        for (i, x) in self.blocks.iter().enumerate() {
            for (j, y) in self.blocks.iter().enumerate() {
                if i == j {
                    continue;
                }
                for &a in x {
                    for &c in x {
                        if c <= a {
                            continue;
                        }
                        let inside = y.iter().any(|&b| a < b && b < c);
                        let outside = y.iter().any(|&d| d > c || d < a);
                        if inside && outside {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    /// Whether blue edges eᵢ and eⱼ lie in the same block.
    pub fn connected(&self, i: usize, j: usize) -> bool {
        self.blocks.iter().any(|b| b.contains(&i) && b.contains(&j))
    }
}

/// The blue-edge connectivity induced by exploration paths realizing the
/// pairing: the face of the disk containing eₖ also contains e_{ι(k+1)}.
pub fn pairing_to_partition(p: &NonCrossingPairing) -> Result<NonCrossingPartition, PairingError> {
    p.check_noncrossing()?;
    let m = p.map.len();
    let next = |k: usize| p.partner(k % m + 1);
    let mut visited = vec![false; m + 1];
    let mut blocks = Vec::new();
    for start in (1..=m).step_by(2) {
        if visited[start] {
            continue;
        }
        let mut block = Vec::new();
        let mut k = start;
        while !visited[k] {
            visited[k] = true;
            block.push(k);
            k = next(k);
        }
        blocks.push(block);
    }
    NonCrossingPartition::new(p.n(), blocks)
}
