//! Cubic multigraphs from the configuration model.
//!
//! Half-edge `h` belongs to vertex `h / 3` with local index `h % 3`. A graph
//! is a fixed-point-free involution on the `6g − 6` half-edges; loops and
//! multi-edges are kept.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct PantsGraph {
    genus: u64,
    matching: Vec<u32>,
}

impl PantsGraph {
    /// Wraps a matching, checking that it is a fixed-point-free involution on
    /// `6g − 6` half-edges.
    pub fn from_matching(genus: u64, matching: Vec<u32>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidInput(format!("genus must be at least 2, got {genus}")));
        }
        let n = 6 * (genus as usize) - 6;
        if matching.len() != n {
            return Err(Error::InvalidInput(format!(
                "genus {genus} needs {n} half-edges, got {}",
                matching.len()
            )));
        }
        for (h, &p) in matching.iter().enumerate() {
            let p = p as usize;
            if p >= n || p == h || matching[p] as usize != h {
                return Err(Error::InvalidInput(format!(
                    "half-edge {h} is not properly matched (partner {p})"
                )));
            }
        }
        Ok(PantsGraph { genus, matching })
    }

    /// Genus-2 graph with all three edges between the two vertices.
    pub fn triple_edge() -> Self {
        PantsGraph {
            genus: 2,
            matching: vec![3, 4, 5, 0, 1, 2],
        }
    }

    pub fn genus(&self) -> u64 {
        self.genus
    }

    pub fn num_vertices(&self) -> usize {
        2 * self.genus as usize - 2
    }

    pub fn num_half_edges(&self) -> usize {
        self.matching.len()
    }

    pub fn num_edges(&self) -> usize {
        self.matching.len() / 2
    }

    pub fn matching(&self) -> &[u32] {
        &self.matching
    }

    #[inline]
    pub fn partner(&self, h: usize) -> usize {
        self.matching[h] as usize
    }

    #[inline]
    pub fn vertex_of(h: usize) -> usize {
        h / 3
    }

    /// Neighbors of `v` with multiplicity; a loop contributes `v` twice.
    pub fn neighbors(&self, v: usize) -> [usize; 3] {
        std::array::from_fn(|i| Self::vertex_of(self.partner(3 * v + i)))
    }

    /// Degree counting multiplicity; always 3.
    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    /// Same graph with vertices renamed by `perm` (old id → new id) and the
    /// local half-edge indices at each vertex rotated by `rotate[v]`.
    pub fn relabeled(&self, perm: &[usize], rotate: &[usize]) -> Result<Self> {
        let n = self.num_vertices();
        if perm.len() != n || rotate.len() != n {
            return Err(Error::InvalidInput("relabeling has the wrong length".into()));
        }
        let map = |h: usize| 3 * perm[h / 3] + (h % 3 + rotate[h / 3]) % 3;
        let mut matching = vec![0u32; self.matching.len()];
        for h in 0..self.matching.len() {
            matching[map(h)] = map(self.partner(h)) as u32;
        }
        Self::from_matching(self.genus, matching)
    }

    /// BFS distances in edges from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.num_vertices()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued vertices are labeled");
            for w in self.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(du + 1);
                    queue.push_back(w);
                }
            }
        }
        dist
    }

    /// Adjacency counts `a[u][w]` in canonical form: the lexicographically
    /// smallest flattened matrix over all vertex orders. Only meant for the
    /// handful of vertices where enumerating permutations is cheap.
    pub fn canonical_adjacency(&self) -> Result<Vec<u8>> {
        let n = self.num_vertices();
        if n > 8 {
            return Err(Error::InvalidInput(format!(
                "canonical form is limited to 8 vertices, got {n}"
            )));
        }
        let mut adj = vec![0u8; n * n];
        for h in 0..self.matching.len() {
            adj[(h / 3) * n + self.partner(h) / 3] += 1;
        }
        let mut perm: Vec<usize> = (0..n).collect();
        let mut best: Option<Vec<u8>> = None;
        loop {
            let candidate: Vec<u8> = (0..n * n)
                .map(|k| adj[perm[k / n] * n + perm[k % n]])
                .collect();
            if best.as_ref().is_none_or(|b| candidate < *b) {
                best = Some(candidate);
            }
            if !next_permutation(&mut perm) {
                break;
            }
        }
        Ok(best.expect("at least one permutation"))
    }
}

fn next_permutation(p: &mut [usize]) -> bool {
    let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) else {
        return false;
    };
    let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).expect("pivot exists");
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Uniform random perfect matching of the `6g − 6` half-edges.
pub fn sample_configuration_model(genus: u64, seed: u64) -> Result<PantsGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_with_rng(genus, &mut rng)
}

pub fn sample_with_rng<R: Rng + ?Sized>(genus: u64, rng: &mut R) -> Result<PantsGraph> {
    if genus < 2 {
        return Err(Error::InvalidInput(format!("genus must be at least 2, got {genus}")));
    }
    let n = 6 * genus as usize - 6;
    let mut order: Vec<u32> = (0..n as u32).collect();
    order.shuffle(rng);
    let mut matching = vec![0u32; n];
    for pair in order.chunks_exact(2) {
        matching[pair[0] as usize] = pair[1];
        matching[pair[1] as usize] = pair[0];
    }
    Ok(PantsGraph { genus, matching })
}

pub fn is_connected(graph: &PantsGraph) -> bool {
    graph.bfs_distances(0).iter().all(Option::is_some)
}

/// Largest BFS distance over all vertex pairs; `None` when disconnected.
pub fn graph_diameter(graph: &PantsGraph) -> Option<u32> {
    let mut best = 0;
    for v in 0..graph.num_vertices() {
        for d in graph.bfs_distances(v) {
            best = best.max(d?);
        }
    }
    Some(best)
}

/// All `(n − 1)!!` perfect matchings of `n` half-edges, in lexicographic order.
pub fn all_matchings(n: usize) -> Vec<Vec<u32>> {
    fn extend(m: &mut Vec<Option<u32>>, out: &mut Vec<Vec<u32>>) {
        let Some(h) = m.iter().position(Option::is_none) else {
            out.push(m.iter().map(|p| p.expect("complete")).collect());
            return;
        };
        for k in h + 1..m.len() {
            if m[k].is_none() {
                m[h] = Some(k as u32);
                m[k] = Some(h as u32);
                extend(m, out);
                m[h] = None;
                m[k] = None;
            }
        }
    }
    let mut out = Vec::new();
    if n.is_multiple_of(2) {
        extend(&mut vec![None; n], &mut out);
    }
    out
}
