//! Finite simple labelled graphs stored as adjacency bit rows, plus the
//! vertex-sampling constructions `G(v1, ..., vk)`, `G[k]`, `G[k]'` and random
//! relabelling.
//!
//! Vertices are `0..n` in the API; the text format is 1-based.

use std::fmt;

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{input, Error, Result};

pub(crate) const WORD: usize = 64;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(WORD)
}

/// Fixed-length bitset over `0..n` used for neighbourhoods and candidate sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitSet {
    words: Vec<u64>,
}

impl BitSet {
    pub fn empty(n: usize) -> Self {
        BitSet { words: vec![0; words_for(n)] }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i);
        }
        s
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        self.words[i / WORD] >> (i % WORD) & 1 == 1
    }

    #[inline]
    pub fn insert(&mut self, i: usize) {
        self.words[i / WORD] |= 1 << (i % WORD);
    }

    #[inline]
    pub fn remove(&mut self, i: usize) {
        self.words[i / WORD] &= !(1 << (i % WORD));
    }

    #[inline]
    pub fn count(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    #[inline]
    pub fn and_assign(&mut self, row: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(row) {
            *a &= *b;
        }
    }

    #[inline]
    pub fn and_not_assign(&mut self, row: &[u64]) {
        for (a, b) in self.words.iter_mut().zip(row) {
            *a &= !*b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * WORD + b)
            })
        })
    }

    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Simple loopless graph on vertex set `0..n`, `n >= 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LabelledGraph {
    n: usize,
    words: usize,
    rows: Vec<u64>,
}

impl LabelledGraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "graphs have at least one vertex");
        let words = words_for(n);
        LabelledGraph { n, words, rows: vec![0; n * words] }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 1..n {
            g.set_edge(i - 1, i, true);
        }
        g
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let mut g = Self::empty(a + b);
        for i in 0..a {
            for j in a..a + b {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from 0-based edges; rejects self-loops, duplicates and
    /// out-of-range endpoints.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return input("a graph needs at least one vertex");
        }
        let mut g = Self::empty(n);
        for &(u, v) in edges {
            if u >= n || v >= n {
                return input(format!("edge ({u}, {v}) out of range for {n} vertices"));
            }
            if u == v {
                return input(format!("self-loop at vertex {u}"));
            }
            if g.has_edge(u, v) {
                return input(format!("duplicate edge ({u}, {v})"));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum::<usize>() / 2
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.rows[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        assert!(u != v, "simple graphs have no loops");
        for (a, b) in [(u, v), (v, u)] {
            let w = &mut self.rows[a * self.words + b / WORD];
            if present {
                *w |= 1 << (b % WORD);
            } else {
                *w &= !(1 << (b % WORD));
            }
        }
    }

    #[inline]
    pub(crate) fn row(&self, u: usize) -> &[u64] {
        &self.rows[u * self.words..(u + 1) * self.words]
    }

    pub fn neighbours(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        let words = self.row(u);
        (0..self.n).filter(move |&v| words[v / WORD] >> (v % WORD) & 1 == 1)
    }

    pub fn degree(&self, u: usize) -> usize {
        self.row(u).iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// Non-edges `(u, v)` with `u < v`.
    pub fn non_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in u + 1..self.n {
                if !self.has_edge(u, v) {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// `E(self) ⊆ E(other)` for graphs on the same vertex set.
    pub fn is_subgraph_of(&self, other: &LabelledGraph) -> bool {
        self.n == other.n && self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    /// Restriction to the first `k` vertices.
    pub fn restrict(&self, k: usize) -> Result<LabelledGraph> {
        if k == 0 || k > self.n {
            return Err(Error::Precondition(format!(
                "restriction size {k} must lie in 1..={}",
                self.n
            )));
        }
        let verts: Vec<usize> = (0..k).collect();
        Ok(self.pattern_unchecked(&verts))
    }

    /// Graph with vertex `i` of the result being `perm[i]` of `self`.
    pub fn permute(&self, perm: &[usize]) -> LabelledGraph {
        debug_assert_eq!(perm.len(), self.n);
        self.pattern_unchecked(perm)
    }

    /// Disjoint union, vertices of `other` shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &LabelledGraph) -> LabelledGraph {
        let mut g = Self::empty(self.n + other.n);
        for (u, v) in self.edges() {
            g.set_edge(u, v, true);
        }
        for (u, v) in other.edges() {
            g.set_edge(u + self.n, v + self.n, true);
        }
        g
    }

    /// `G(v1, ..., vk)`: graph on `0..k` with `i ~ j` iff `verts[i] != verts[j]`
    /// and they are adjacent. Repeated vertices never produce an edge.
    pub fn induced_pattern(&self, verts: &[usize]) -> Result<LabelledGraph> {
        if verts.is_empty() {
            return input("pattern needs at least one vertex");
        }
        if let Some(&v) = verts.iter().find(|&&v| v >= self.n) {
            return input(format!("vertex {v} out of range for {} vertices", self.n));
        }
        Ok(self.pattern_unchecked(verts))
    }

    pub(crate) fn pattern_unchecked(&self, verts: &[usize]) -> LabelledGraph {
        let k = verts.len();
        let mut g = Self::empty(k);
        for i in 0..k {
            for j in i + 1..k {
                if verts[i] != verts[j] && self.has_edge(verts[i], verts[j]) {
                    g.set_edge(i, j, true);
                }
            }
        }
        g
    }

    /// `G[k]`: the pattern of `k` independent uniform vertices.
    pub fn sample_with_replacement<R: Rng + ?Sized>(&self, k: usize, rng: &mut R) -> Result<LabelledGraph> {
        if k == 0 {
            return Err(Error::Precondition("sample size must be at least 1".into()));
        }
        let verts: Vec<usize> = (0..k).map(|_| rng.gen_range(0..self.n)).collect();
        Ok(self.pattern_unchecked(&verts))
    }

    /// `G[k]'`: the pattern of a uniform sequence of `k` distinct vertices.
    pub fn sample_without_replacement<R: Rng + ?Sized>(
        &self,
        k: usize,
        rng: &mut R,
    ) -> Result<LabelledGraph> {
        if k == 0 || k > self.n {
            return Err(Error::Precondition(format!(
                "cannot draw {k} distinct vertices from {}",
                self.n
            )));
        }
        let verts = index::sample(rng, self.n, k).into_vec();
        Ok(self.pattern_unchecked(&verts))
    }

    /// The graph relabelled by a uniform random permutation.
    pub fn random_relabel<R: Rng + ?Sized>(&self, rng: &mut R) -> LabelledGraph {
        let mut perm: Vec<usize> = (0..self.n).collect();
        perm.shuffle(rng);
        self.permute(&perm)
    }

    /// 0/1 adjacency matrix.
    pub fn adjacency(&self) -> Vec<Vec<u8>> {
        (0..self.n)
            .map(|u| (0..self.n).map(|v| self.has_edge(u, v) as u8).collect())
            .collect()
    }
}

impl fmt::Debug for LabelledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LabelledGraph(n={}, edges={:?})", self.n, self.edges())
    }
}
