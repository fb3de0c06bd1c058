//! Canonical forms for small graphs and the enumeration of unlabelled graphs.
//!
//! The canonical form is the relabelling that minimises the adjacency bit
//! code, searched over permutations that list vertices in order of a vertex
//! invariant (degree). Since that restricted permutation set is itself
//! isomorphism invariant the minimum is a complete invariant.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use crate::error::{capacity, Result};
use crate::graph::LabelledGraph;

/// Largest graph `canonicalize` accepts.
pub const CANON_CAP: usize = 10;
/// Default cap for `enumerate_unlabelled`.
pub const ENUM_CAP: usize = 7;

/// Minimum code over invariant-ordered permutations.
///
/// `column(perm, v)` returns the bits contributed when `v` is placed at
/// position `perm.len()`, as `(bits, width)`. Bits are appended most
/// significant first. Returns the code and the minimising permutation
/// (`perm[position] = vertex`).
pub(crate) fn min_code<K, C>(keys: &[K], column: C) -> (u64, Vec<usize>)
where
    K: Ord + Copy,
    C: Fn(&[usize], usize) -> (u64, u32),
{
    let n = keys.len();
    let mut sorted: Vec<K> = keys.to_vec();
    sorted.sort();

    struct Search<'a, K, C> {
        keys: &'a [K],
        sorted: Vec<K>,
        column: C,
        perm: Vec<usize>,
        used: Vec<bool>,
        best: Option<(u64, Vec<usize>)>,
        best_prefix: Vec<u64>,
        prefix: Vec<u64>,
    }

    impl<K: Ord + Copy, C: Fn(&[usize], usize) -> (u64, u32)> Search<'_, K, C> {
        fn go(&mut self, depth: usize, code: u64) {
            let n = self.keys.len();
            if depth == n {
                if self.best.as_ref().is_none_or(|(b, _)| code < *b) {
                    self.best = Some((code, self.perm.clone()));
                    self.best_prefix.clone_from(&self.prefix);
                }
                return;
            }
            for v in 0..n {
                if self.used[v] || self.keys[v] != self.sorted[depth] {
                    continue;
                }
                let (bits, width) = (self.column)(&self.perm, v);
                let next = if width == 0 { code } else { (code << width) | bits };
                if self.best.is_some() {
                    match next.cmp(&self.best_prefix[depth]) {
                        Ordering::Greater => continue,
                        Ordering::Less => {
                            // strictly better prefix: forget the old bound below this depth
                            self.best = None;
                        }
                        Ordering::Equal => {}
                    }
                }
                self.prefix[depth] = next;
                self.used[v] = true;
                self.perm.push(v);
                self.go(depth + 1, next);
                self.perm.pop();
                self.used[v] = false;
            }
        }
    }

    let mut s = Search {
        keys,
        sorted,
        column,
        perm: Vec::with_capacity(n),
        used: vec![false; n],
        best: None,
        best_prefix: vec![0; n],
        prefix: vec![0; n],
    };
    s.go(0, 0);
    s.best.expect("at least one permutation")
}

/// Isomorphism class of a finite simple graph, held as its canonical
/// labelled representative.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct UnlabelledGraph {
    code: u64,
    graph: LabelledGraph,
}

impl UnlabelledGraph {
    /// Canonical labelled representative.
    pub fn graph(&self) -> &LabelledGraph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    /// Canonical adjacency code (upper triangle, column-major, MSB first).
    pub fn code(&self) -> u64 {
        self.code
    }
}

impl Ord for UnlabelledGraph {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.n(), self.code).cmp(&(other.n(), other.code))
    }
}

impl PartialOrd for UnlabelledGraph {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl AsRef<LabelledGraph> for UnlabelledGraph {
    fn as_ref(&self) -> &LabelledGraph {
        &self.graph
    }
}

impl fmt::Debug for UnlabelledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Unlabelled(n={}, code={:#x}, edges={:?})", self.n(), self.code, self.graph.edges())
    }
}

/// Canonical representative of the isomorphism class of `g`.
pub fn canonicalize(g: &LabelledGraph) -> Result<UnlabelledGraph> {
    let n = g.n();
    if n > CANON_CAP {
        return capacity(format!("canonicalization is capped at {CANON_CAP} vertices, got {n}"));
    }
    // Higher degree first so dense parts land late in the code.
    let keys: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let (code, perm) = min_code(&keys, |perm, v| {
        let mut bits = 0u64;
        for &u in perm {
            bits = (bits << 1) | g.has_edge(u, v) as u64;
        }
        (bits, perm.len() as u32)
    });
    Ok(UnlabelledGraph { code, graph: g.permute(&perm) })
}

/// Deterministically ordered list of all unlabelled graphs up to `max_n`
/// vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphEnumeration {
    max_n: usize,
    list: Vec<UnlabelledGraph>,
}

impl GraphEnumeration {
    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn list(&self) -> &[UnlabelledGraph] {
        &self.list
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }

    pub fn is_empty(&self) -> bool {
        self.list.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &UnlabelledGraph> {
        self.list.iter()
    }

    /// Graphs with exactly `n` vertices.
    pub fn of_order(&self, n: usize) -> impl Iterator<Item = &UnlabelledGraph> {
        self.list.iter().filter(move |g| g.n() == n)
    }
}

/// All unlabelled graphs with `1..=max_n` vertices, ordered by vertex count
/// then canonical code.
pub fn enumerate_unlabelled(max_n: usize) -> Result<GraphEnumeration> {
    enumerate_with_cap(max_n, ENUM_CAP)
}

pub fn enumerate_with_cap(max_n: usize, cap: usize) -> Result<GraphEnumeration> {
    if max_n > cap.min(CANON_CAP) {
        return capacity(format!("enumeration is capped at {} vertices, got {max_n}", cap.min(CANON_CAP)));
    }
    let mut list = Vec::new();
    if max_n == 0 {
        return Ok(GraphEnumeration { max_n, list });
    }
    let mut level: BTreeSet<UnlabelledGraph> = BTreeSet::new();
    level.insert(canonicalize(&LabelledGraph::empty(1))?);
    list.extend(level.iter().cloned());
    for n in 2..=max_n {
        // every graph on n vertices is a graph on n-1 vertices plus one vertex
        let mut next = BTreeSet::new();
        for base in &level {
            for mask in 0u32..(1 << (n - 1)) {
                let mut g = LabelledGraph::empty(n);
                for (u, v) in base.graph().edges() {
                    g.set_edge(u, v, true);
                }
                for u in 0..n - 1 {
                    if mask >> u & 1 == 1 {
                        g.set_edge(u, n - 1, true);
                    }
                }
                next.insert(canonicalize(&g)?);
            }
        }
        list.extend(next.iter().cloned());
        level = next;
    }
    Ok(GraphEnumeration { max_n, list })
}

/// All `2^(k choose 2)` labelled graphs on `0..k`, in edge-mask order.
pub fn all_labelled(k: usize) -> Vec<LabelledGraph> {
    let pairs: Vec<(usize, usize)> = (0..k).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    (0u64..1 << pairs.len())
        .map(|mask| {
            let mut g = LabelledGraph::empty(k);
            for (b, &(i, j)) in pairs.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    g.set_edge(i, j, true);
                }
            }
            g
        })
        .collect()
}
