//! Bipartite graphs with a fixed bipartition, their densities, and
//! W-random bipartite graphs from (not necessarily symmetric) kernels.
//!
//! Patterns carry their own bipartition: row vertices map to rows of the
//! host and column vertices to columns.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::density::{falling, DensityEstimate};
use crate::error::{capacity, input, Error, Result};
use crate::exchangeable::{check_disjoint, empirical_law, product_criterion, EdgePattern, ExtremalityReport, Outcome, PrefixLaw};
use crate::graph::{words_for, BitSet, WORD};
use crate::graphon::{cumulative, locate, normalise_measures, unit_interval, WORK_CAP};
use crate::rational::{self, frac, int, to_f64, Rational};
use crate::rng::{chunked, StreamRng};

/// Largest side of a pattern.
pub const SIDE_CAP: usize = 6;

/// Graph with rows `0..n1`, columns `0..n2` and edges only between them.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipartiteGraph {
    n1: usize,
    n2: usize,
    words: usize,
    rows: Vec<u64>,
}

impl BipartiteGraph {
    pub fn empty(n1: usize, n2: usize) -> Self {
        assert!(n1 >= 1 && n2 >= 1, "both sides need a vertex");
        let words = words_for(n2);
        BipartiteGraph { n1, n2, words, rows: vec![0; n1 * words] }
    }

    pub fn complete(n1: usize, n2: usize) -> Self {
        let mut g = Self::empty(n1, n2);
        for i in 0..n1 {
            for j in 0..n2 {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// 0-based `(row, column)` edges; duplicates and out-of-range ids are
    /// rejected.
    pub fn from_edges(n1: usize, n2: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if n1 == 0 || n2 == 0 {
            return input("both sides need at least one vertex");
        }
        let mut g = Self::empty(n1, n2);
        for &(i, j) in edges {
            if i >= n1 || j >= n2 {
                return input(format!("edge ({i}, {j}) out of range for {n1}x{n2}"));
            }
            if g.has_edge(i, j) {
                return input(format!("duplicate edge ({i}, {j})"));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    #[inline]
    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i * self.words + j / WORD] >> (j % WORD) & 1 == 1
    }

    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        let w = &mut self.rows[i * self.words + j / WORD];
        if present {
            *w |= 1 << (j % WORD);
        } else {
            *w &= !(1 << (j % WORD));
        }
    }

    fn row(&self, i: usize) -> &[u64] {
        &self.rows[i * self.words..(i + 1) * self.words]
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n1)
            .flat_map(|i| (0..self.n2).filter(move |&j| self.has_edge(i, j)).map(move |j| (i, j)))
            .collect()
    }

    /// Row `a` of the result is row `rows[a]` of `self`, likewise columns.
    pub fn pattern(&self, rows: &[usize], cols: &[usize]) -> BipartiteGraph {
        let mut g = Self::empty(rows.len(), cols.len());
        for (a, &i) in rows.iter().enumerate() {
            for (b, &j) in cols.iter().enumerate() {
                if self.has_edge(i, j) {
                    g.set_edge(a, b, true);
                }
            }
        }
        g
    }

    /// First `k1` rows and `k2` columns.
    pub fn restrict(&self, k1: usize, k2: usize) -> Result<BipartiteGraph> {
        if k1 == 0 || k2 == 0 || k1 > self.n1 || k2 > self.n2 {
            return Err(Error::Precondition(format!("cannot restrict {}x{} to {k1}x{k2}", self.n1, self.n2)));
        }
        Ok(self.pattern(&(0..k1).collect::<Vec<_>>(), &(0..k2).collect::<Vec<_>>()))
    }

    /// `E(self) ⊆ E(other)` on the same vertex sets.
    pub fn is_subgraph_of(&self, other: &BipartiteGraph) -> bool {
        self.n1 == other.n1 && self.n2 == other.n2 && self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for BipartiteGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BipartiteGraph({}x{}, edges={:?})", self.n1, self.n2, self.edges())
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Hom,
    Inj,
    Ind,
}

fn check_pattern(f: &BipartiteGraph) -> Result<()> {
    if f.n1 > SIDE_CAP || f.n2 > SIDE_CAP {
        return capacity(format!("pattern sides are capped at {SIDE_CAP}, got {}x{}", f.n1, f.n2));
    }
    Ok(())
}

fn count_maps(f: &BipartiteGraph, g: &BipartiteGraph, mode: Mode) -> Result<u128> {
    check_pattern(f)?;
    if mode != Mode::Hom && (f.n1 > g.n1 || f.n2 > g.n2) {
        return Ok(0);
    }
    if mode == Mode::Hom && (g.n1 as f64).powi(f.n1 as i32) > WORK_CAP * 10.0 {
        return capacity("too many row assignments for an exact bipartite count");
    }

    fn columns(f: &BipartiteGraph, g: &BipartiteGraph, mode: Mode, img: &[usize], j: usize, used: &mut BitSet) -> u128 {
        if j == f.n2 {
            return 1;
        }
        let mut cand = BitSet::full(g.n2);
        for (a, &i) in img.iter().enumerate() {
            if f.has_edge(a, j) {
                cand.and_assign(g.row(i));
            } else if mode == Mode::Ind {
                cand.and_not_assign(g.row(i));
            }
        }
        if mode == Mode::Hom {
            return cand.count() as u128 * columns(f, g, mode, img, j + 1, used);
        }
        cand.and_not_assign(used.words());
        if j + 1 == f.n2 {
            return cand.count() as u128;
        }
        let mut total = 0;
        for c in cand.iter() {
            used.insert(c);
            total += columns(f, g, mode, img, j + 1, used);
            used.remove(c);
        }
        total
    }

    fn rows(f: &BipartiteGraph, g: &BipartiteGraph, mode: Mode, img: &mut Vec<usize>, used_cols: &mut BitSet) -> u128 {
        if img.len() == f.n1 {
            return columns(f, g, mode, img, 0, used_cols);
        }
        let mut total = 0;
        for i in 0..g.n1 {
            if mode != Mode::Hom && img.contains(&i) {
                continue;
            }
            img.push(i);
            total += rows(f, g, mode, img, used_cols);
            img.pop();
        }
        total
    }

    Ok(rows(f, g, mode, &mut Vec::with_capacity(f.n1), &mut BitSet::empty(g.n2)))
}

/// Part-respecting homomorphism density.
pub fn bip_t(f: &BipartiteGraph, g: &BipartiteGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Hom)?;
    let den = num_traits::pow(BigInt::from(g.n1), f.n1) * num_traits::pow(BigInt::from(g.n2), f.n2);
    Ok(Rational::new(BigInt::from(c), den))
}

/// Injective density; zero when either side of `F` is larger than in `G`.
pub fn bip_t_inj(f: &BipartiteGraph, g: &BipartiteGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Inj)?;
    if c == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(BigInt::from(c), falling(g.n1, f.n1) * falling(g.n2, f.n2)))
}

/// Induced density; zero when either side of `F` is larger than in `G`.
pub fn bip_t_ind(f: &BipartiteGraph, g: &BipartiteGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Ind)?;
    if c == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(BigInt::from(c), falling(g.n1, f.n1) * falling(g.n2, f.n2)))
}

/// `|t - t_inj|` against `v1(F)^2 / (2 v1(G)) + v2(F)^2 / (2 v2(G))`.
pub fn bip_bound_check(f: &BipartiteGraph, g: &BipartiteGraph) -> Result<crate::density::BoundCheck> {
    use num_traits::Signed;
    let gap = (bip_t(f, g)? - bip_t_inj(f, g)?).abs();
    let (k1, k2) = (f.n1 as i64, f.n2 as i64);
    let bound = frac(k1 * k1, 2 * g.n1 as i64) + frac(k2 * k2, 2 * g.n2 as i64);
    let ok = gap <= bound;
    Ok(crate::density::BoundCheck { gap, bound, ok })
}

/// Step kernel on `[0,1]^2` with separate row and column partitions; no
/// symmetry is required.
#[derive(Clone, PartialEq)]
pub struct BipartiteKernel {
    mu1: Vec<Rational>,
    mu2: Vec<Rational>,
    w: Vec<Vec<Rational>>,
    cum1: Vec<f64>,
    cum2: Vec<f64>,
    w_f: Vec<Vec<f64>>,
}

impl BipartiteKernel {
    pub fn new(mu1: Vec<Rational>, mu2: Vec<Rational>, w: Vec<Vec<Rational>>) -> Result<Self> {
        let mu1 = normalise_measures(mu1)?;
        let mu2 = normalise_measures(mu2)?;
        if w.len() != mu1.len() || w.iter().any(|r| r.len() != mu2.len()) {
            return input(format!("kernel must be {}x{}", mu1.len(), mu2.len()));
        }
        if w.iter().flatten().any(|x| !unit_interval(x)) {
            return input("kernel entries must lie in [0, 1]");
        }
        let cum1 = cumulative(&mu1.iter().map(to_f64).collect::<Vec<_>>());
        let cum2 = cumulative(&mu2.iter().map(to_f64).collect::<Vec<_>>());
        let w_f = w.iter().map(|r| r.iter().map(to_f64).collect()).collect();
        Ok(BipartiteKernel { mu1, mu2, w, cum1, cum2, w_f })
    }

    pub fn from_f64(mu1: &[f64], mu2: &[f64], w: &[Vec<f64>]) -> Result<Self> {
        let conv = |x: &f64| rational::from_f64(*x).ok_or_else(|| Error::Input(format!("not a finite number: {x}")));
        Self::new(
            mu1.iter().map(conv).collect::<Result<_>>()?,
            mu2.iter().map(conv).collect::<Result<_>>()?,
            w.iter().map(|r| r.iter().map(conv).collect::<Result<_>>()).collect::<Result<_>>()?,
        )
    }

    pub fn constant(p: Rational) -> Result<Self> {
        Self::new(vec![int(1)], vec![int(1)], vec![vec![p]])
    }

    /// Biadjacency matrix of `g` on uniform row and column blocks.
    pub fn from_graph(g: &BipartiteGraph) -> Self {
        let w = (0..g.n1).map(|i| (0..g.n2).map(|j| int(g.has_edge(i, j) as i64)).collect()).collect();
        Self::new(vec![frac(1, g.n1 as i64); g.n1], vec![frac(1, g.n2 as i64); g.n2], w).expect("biadjacency kernel is valid")
    }

    pub fn m1(&self) -> usize {
        self.mu1.len()
    }

    pub fn m2(&self) -> usize {
        self.mu2.len()
    }

    pub fn row_measures(&self) -> &[Rational] {
        &self.mu1
    }

    pub fn col_measures(&self) -> &[Rational] {
        &self.mu2
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.w
    }
}

impl fmt::Debug for BipartiteKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BipartiteKernel").field("m1", &self.m1()).field("m2", &self.m2()).field("w", &self.w_f).finish()
    }
}

/// `G(n1, n2, W)`: iid row labels `X_i`, column labels `Y_j`, edge `(i, j)`
/// with probability `W(X_i, Y_j)` independently.
pub fn sample_bip_w_random<R: Rng + ?Sized>(w: &BipartiteKernel, n1: usize, n2: usize, rng: &mut R) -> Result<BipartiteGraph> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::Precondition("both sides need at least one vertex".into()));
    }
    let xs: Vec<usize> = (0..n1).map(|_| locate(&w.cum1, rng.gen())).collect();
    let ys: Vec<usize> = (0..n2).map(|_| locate(&w.cum2, rng.gen())).collect();
    let mut g = BipartiteGraph::empty(n1, n2);
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            if rng.gen::<f64>() < w.w_f[x][y] {
                g.set_edge(i, j, true);
            }
        }
    }
    Ok(g)
}

/// Exact `∫ Π_{ij ∈ E(F)} W(x_i, y_j)`: a sum over row-block assignments, with
/// the column integrals factorising given the rows.
pub fn bip_exact_density(f: &BipartiteGraph, w: &BipartiteKernel) -> Result<Rational> {
    check_pattern(f)?;
    if (w.m1() as f64).powi(f.n1 as i32) * (w.m2() * f.n2) as f64 > WORK_CAP {
        return capacity("bipartite block sum exceeds the work cap");
    }
    fn go(f: &BipartiteGraph, w: &BipartiteKernel, z: &mut Vec<usize>, acc: Rational) -> Rational {
        if z.len() == f.n1 {
            let mut prod = acc;
            for j in 0..f.n2 {
                let col: Rational = (0..w.m2())
                    .map(|b| {
                        let mut term = w.mu2[b].clone();
                        for (a, &za) in z.iter().enumerate() {
                            if f.has_edge(a, j) {
                                term *= &w.w[za][b];
                            }
                        }
                        term
                    })
                    .sum();
                prod *= col;
                if prod.is_zero() {
                    break;
                }
            }
            return prod;
        }
        let mut total = Rational::zero();
        for a in 0..w.m1() {
            if w.mu1[a].is_zero() {
                continue;
            }
            z.push(a);
            total += go(f, w, z, &acc * &w.mu1[a]);
            z.pop();
        }
        total
    }
    Ok(go(f, w, &mut Vec::new(), Rational::one()))
}

/// Monte Carlo `P(F ⊆ G(k1, k2, W))` from independent small samples.
pub fn bip_mc_density<R: Rng + ?Sized>(f: &BipartiteGraph, w: &BipartiteKernel, samples: u64, alpha: f64, rng: &mut R) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let hits = chunked(
        rng,
        samples,
        Ok(0u64),
        |r, len| {
            let mut h = 0;
            for _ in 0..len {
                h += f.is_subgraph_of(&sample_bip_w_random(w, f.n1, f.n2, r)?) as u64;
            }
            Ok(h)
        },
        |a: Result<u64>, b| Ok(a? + b?),
    )?;
    Ok(DensityEstimate::from_hits(hits, samples, alpha))
}

impl Outcome for BipartiteGraph {
    type Shape = (usize, usize);

    fn shape(&self) -> (usize, usize) {
        (self.n1, self.n2)
    }

    fn universe((k1, k2): (usize, usize)) -> Result<Vec<Self>> {
        if k1 == 0 || k2 == 0 || k1 * k2 > 16 {
            return capacity(format!("bipartite outcome space {k1}x{k2} is too large"));
        }
        let cells = k1 * k2;
        Ok((0u32..1 << cells)
            .map(|mask| {
                let mut g = BipartiteGraph::empty(k1, k2);
                for c in 0..cells {
                    if mask >> c & 1 == 1 {
                        g.set_edge(c / k2, c % k2, true);
                    }
                }
                g
            })
            .collect())
    }

    /// Canonical form under independent row and column permutations.
    fn orbit_key(&self) -> Result<Self> {
        if self.n1 > SIDE_CAP || self.n2 > SIDE_CAP {
            return capacity("bipartite canonicalization capped at 6x6");
        }
        // best row order for every column permutation
        let mut best: Option<(u64, Vec<usize>, Vec<usize>)> = None;
        let col_keys: Vec<usize> = (0..self.n2).map(|j| (0..self.n1).filter(|&i| self.has_edge(i, j)).count()).collect();
        for_each_permutation(self.n2, &mut |cols| {
            if cols.windows(2).any(|w| col_keys[w[0]] > col_keys[w[1]]) {
                return;
            }
            let row_keys: Vec<u64> = (0..self.n1)
                .map(|i| cols.iter().fold(0u64, |acc, &j| (acc << 1) | self.has_edge(i, j) as u64))
                .collect();
            // rows sorted by their column pattern minimise the code for this column order
            let mut order: Vec<usize> = (0..self.n1).collect();
            order.sort_by_key(|&i| row_keys[i]);
            let code = order.iter().fold(0u64, |acc, &i| (acc << self.n2) | row_keys[i]);
            if best.as_ref().is_none_or(|b| code < b.0) {
                best = Some((code, order, cols.to_vec()));
            }
        });
        let (_, rows, cols) = best.expect("at least one column order");
        Ok(self.pattern(&rows, &cols))
    }
}

fn for_each_permutation(n: usize, f: &mut dyn FnMut(&[usize])) {
    fn go(n: usize, cur: &mut Vec<usize>, used: &mut [bool], f: &mut dyn FnMut(&[usize])) {
        if cur.len() == n {
            f(cur);
            return;
        }
        for v in 0..n {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(n, cur, used, f);
                cur.pop();
                used[v] = false;
            }
        }
    }
    go(n, &mut Vec::new(), &mut vec![false; n], f)
}

/// Source of separately exchangeable infinite bipartite graphs.
#[derive(Clone, Debug)]
pub enum BipartiteSource {
    Kernel(BipartiteKernel),
    /// Kernel drawn once per infinite graph.
    Mixture(Vec<(f64, BipartiteKernel)>),
}

impl BipartiteSource {
    /// Mixture with positive weights summing to one (within 1e-9).
    pub fn mixture(parts: Vec<(f64, BipartiteKernel)>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|(p, _)| !(*p > 0.0)) {
            return input("mixture weights must be positive and nonempty");
        }
        let total: f64 = parts.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-9 {
            return input(format!("mixture weights sum to {total}, not 1"));
        }
        Ok(BipartiteSource::Mixture(parts))
    }

    pub fn sample_prefix(&self, k1: usize, k2: usize, rng: &mut StreamRng) -> Result<BipartiteGraph> {
        match self {
            BipartiteSource::Kernel(w) => sample_bip_w_random(w, k1, k2, rng),
            BipartiteSource::Mixture(parts) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = &parts[parts.len() - 1].1;
                for (p, w) in parts {
                    acc += p;
                    if u < acc {
                        chosen = w;
                        break;
                    }
                }
                sample_bip_w_random(chosen, k1, k2, rng)
            }
        }
    }
}

/// Empirical law of the `k1 x k2` corner.
pub fn bip_prefix_law_empirical<R: Rng + ?Sized>(
    src: &BipartiteSource,
    k1: usize,
    k2: usize,
    samples: u64,
    rng: &mut R,
) -> Result<PrefixLaw<BipartiteGraph>> {
    BipartiteGraph::universe((k1, k2))?;
    empirical_law((k1, k2), samples, rng, |r| src.sample_prefix(k1, k2, r))
}

/// Exact law of the `k1 x k2` corner of `G(∞, ∞, W)`.
pub fn bip_prefix_law_exact(w: &BipartiteKernel, k1: usize, k2: usize) -> Result<PrefixLaw<BipartiteGraph>> {
    let outcomes = BipartiteGraph::universe((k1, k2))?;
    let mut probs = BTreeMap::new();
    for f in outcomes {
        // P(corner = F) by inclusion-exclusion is slower; sum directly over row blocks
        let mut total = Rational::zero();
        let mut z = vec![0usize; k1];
        loop {
            let mut term: Rational = z.iter().map(|&a| w.mu1[a].clone()).product();
            for j in 0..k2 {
                let col: Rational = (0..w.m2())
                    .map(|b| {
                        let mut t = w.mu2[b].clone();
                        for (a, &za) in z.iter().enumerate() {
                            let p = &w.w[za][b];
                            t *= if f.has_edge(a, j) { p.clone() } else { int(1) - p };
                        }
                        t
                    })
                    .sum();
                term *= col;
            }
            total += term;
            let mut i = 0;
            while i < k1 {
                z[i] += 1;
                if z[i] < w.m1() {
                    break;
                }
                z[i] = 0;
                i += 1;
            }
            if i == k1 {
                break;
            }
        }
        probs.insert(f, total);
    }
    PrefixLaw::exact((k1, k2), probs)
}

/// Side of a bipartite pattern vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    Row(usize),
    Col(usize),
}

/// Product criterion on pairs of patterns with disjoint row sets and
/// disjoint column sets. Edges are `(Row(i), Col(j))`.
pub fn bip_extremality_test<R: Rng + ?Sized>(
    src: &BipartiteSource,
    pairs: &[(EdgePattern<Side>, EdgePattern<Side>)],
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<ExtremalityReport> {
    check_disjoint(pairs)?;
    let (mut k1, mut k2) = (1, 1);
    for (a, b) in pairs {
        for &(u, v) in a.edges().iter().chain(b.edges()) {
            if !matches!((u, v), (Side::Row(_), Side::Col(_))) {
                return input("bipartite pattern edges must join a row to a column");
            }
        }
        for v in a.vertices().iter().chain(b.vertices()) {
            match *v {
                Side::Row(i) => k1 = k1.max(i + 1),
                Side::Col(j) => k2 = k2.max(j + 1),
            }
        }
    }
    let has = |h: &BipartiteGraph, u: Side, v: Side| match (u, v) {
        (Side::Row(i), Side::Col(j)) => h.has_edge(i, j),
        _ => false,
    };
    product_criterion(
        pairs.len(),
        samples,
        alpha,
        rng,
        |r| src.sample_prefix(k1, k2, r),
        |h, i| (pairs[i].0.holds(|u, v| has(h, u, v)), pairs[i].1.holds(|u, v| has(h, u, v))),
    )
}
