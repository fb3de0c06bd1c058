//! Directed graphs with loops and their exchangeable limits.
//!
//! A limit object is a quintuple `(W00, W01, W10, W11, w)` of step kernels on
//! common blocks: `W_αβ(a, b)` is the probability that, for latent blocks `a`
//! of `i` and `b` of `j`, the indicators of `i → j` and `j → i` equal `α` and
//! `β`; `w(a) ∈ {0, 1}` decides the loop at `i`. The quadruple-plus-`p` form
//! lets the pair law also depend on iid Bernoulli(`p`) loop flags; it is
//! handled by lifting to a quintuple on blocks × flags.
//!
//! When a pattern is mapped with repeated host vertices, an arc between two
//! pattern vertices sent to the same host vertex needs a loop there.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::Rng;

use crate::canon::min_code;
use crate::density::{falling, PATTERN_CAP};
use crate::error::{capacity, input, Error, Result};
use crate::exchangeable::{check_disjoint, empirical_law, product_criterion, EdgePattern, ExtremalityReport, Outcome, PrefixLaw};
use crate::graph::{words_for, BitSet, WORD};
use crate::graphon::{check_work, cumulative, locate, normalise_measures, unit_interval};
use crate::rational::{frac, int, to_f64, Rational};
use crate::rng::StreamRng;

/// Vertex cap for directed canonicalization.
pub const DIRECTED_CANON_CAP: usize = 8;
/// Largest prefix whose outcome space (`2^(k^2)` graphs) is listed.
pub const DIRECTED_PREFIX_CAP: usize = 4;

/// Directed graph on `0..n`; any zero-one adjacency matrix, diagonal
/// included.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DirectedGraph {
    n: usize,
    words: usize,
    out: Vec<u64>,
}

impl DirectedGraph {
    pub fn empty(n: usize) -> Self {
        assert!(n >= 1, "graphs have at least one vertex");
        let words = words_for(n);
        DirectedGraph { n, words, out: vec![0; n * words] }
    }

    /// 0-based arcs `u → v`; `u == v` is a loop. Duplicates are rejected.
    pub fn from_edges(n: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        if n == 0 {
            return input("a graph needs at least one vertex");
        }
        let mut g = Self::empty(n);
        for &(u, v) in arcs {
            if u >= n || v >= n {
                return input(format!("arc ({u}, {v}) out of range for {n} vertices"));
            }
            if g.has_edge(u, v) {
                return input(format!("duplicate arc ({u}, {v})"));
            }
            g.set_edge(u, v, true);
        }
        Ok(g)
    }

    /// Orientation of the path `0 → 1 → ... → (n-1) → 0`.
    pub fn cycle(n: usize) -> Self {
        let mut g = Self::empty(n);
        for i in 0..n {
            g.set_edge(i, (i + 1) % n, true);
        }
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.out[u * self.words + v / WORD] >> (v % WORD) & 1 == 1
    }

    pub fn has_loop(&self, u: usize) -> bool {
        self.has_edge(u, u)
    }

    pub fn set_edge(&mut self, u: usize, v: usize, present: bool) {
        let w = &mut self.out[u * self.words + v / WORD];
        if present {
            *w |= 1 << (v % WORD);
        } else {
            *w &= !(1 << (v % WORD));
        }
    }

    fn row(&self, u: usize) -> &[u64] {
        &self.out[u * self.words..(u + 1) * self.words]
    }

    /// Arcs including loops.
    pub fn edge_count(&self) -> usize {
        self.out.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn loop_count(&self) -> usize {
        (0..self.n).filter(|&u| self.has_loop(u)).count()
    }

    pub fn loops(&self) -> Vec<bool> {
        (0..self.n).map(|u| self.has_loop(u)).collect()
    }

    /// Arcs in row-major order, loops included.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n)
            .flat_map(|u| (0..self.n).filter(move |&v| self.has_edge(u, v)).map(move |v| (u, v)))
            .collect()
    }

    /// Vertex `a` of the result is `verts[a]`; repeats are allowed.
    pub fn pattern(&self, verts: &[usize]) -> DirectedGraph {
        let mut g = Self::empty(verts.len());
        for (a, &u) in verts.iter().enumerate() {
            for (b, &v) in verts.iter().enumerate() {
                if self.has_edge(u, v) {
                    g.set_edge(a, b, true);
                }
            }
        }
        g
    }

    pub fn restrict(&self, k: usize) -> Result<DirectedGraph> {
        if k == 0 || k > self.n {
            return Err(Error::Precondition(format!("cannot restrict {} vertices to {k}", self.n)));
        }
        Ok(self.pattern(&(0..k).collect::<Vec<_>>()))
    }

    /// Vertex `perm[a]` of `self` becomes vertex `a`.
    pub fn permute(&self, perm: &[usize]) -> DirectedGraph {
        assert_eq!(perm.len(), self.n);
        self.pattern(perm)
    }

    pub fn is_subgraph_of(&self, other: &DirectedGraph) -> bool {
        self.n == other.n && self.out.iter().zip(&other.out).all(|(a, b)| a & !b == 0)
    }

    fn in_rows(&self) -> Vec<u64> {
        let mut t = vec![0u64; self.n * self.words];
        for (u, v) in self.edges() {
            t[v * self.words + u / WORD] |= 1 << (u % WORD);
        }
        t
    }
}

impl fmt::Debug for DirectedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DirectedGraph(n={}, arcs={:?})", self.n, self.edges())
    }
}

/// Canonical representative under vertex relabelling, with its code
/// (loop bit, then arcs to and from earlier vertices, per position).
pub fn canonicalize_directed(g: &DirectedGraph) -> Result<(u64, DirectedGraph)> {
    let n = g.n;
    if n > DIRECTED_CANON_CAP {
        return capacity(format!("directed canonicalization is capped at {DIRECTED_CANON_CAP} vertices, got {n}"));
    }
    let keys: Vec<(bool, usize, usize)> = (0..n)
        .map(|v| {
            let outd = (0..n).filter(|&u| u != v && g.has_edge(v, u)).count();
            let ind = (0..n).filter(|&u| u != v && g.has_edge(u, v)).count();
            (g.has_loop(v), outd, ind)
        })
        .collect();
    let (code, perm) = min_code(&keys, |perm, v| {
        let mut bits = g.has_loop(v) as u64;
        for &u in perm {
            bits = (bits << 2) | (g.has_edge(u, v) as u64) << 1 | g.has_edge(v, u) as u64;
        }
        (bits, 2 * perm.len() as u32 + 1)
    });
    Ok((code, g.permute(&perm)))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Hom,
    Inj,
    Ind,
}

fn count_maps(f: &DirectedGraph, g: &DirectedGraph, mode: Mode) -> Result<u128> {
    let k = f.n;
    if k > PATTERN_CAP {
        return capacity(format!("pattern has {k} vertices, cap is {PATTERN_CAP}"));
    }
    if mode != Mode::Hom && k > g.n {
        return Ok(0);
    }
    let ins = g.in_rows();
    let mut loops = BitSet::empty(g.n);
    for u in 0..g.n {
        if g.has_loop(u) {
            loops.insert(u);
        }
    }
    let words = g.words;

    struct Ctx<'a> {
        f: &'a DirectedGraph,
        g: &'a DirectedGraph,
        ins: &'a [u64],
        loops: &'a BitSet,
        words: usize,
        mode: Mode,
        img: Vec<usize>,
        used: BitSet,
    }

    fn go(c: &mut Ctx<'_>) -> u128 {
        let j = c.img.len();
        if j == c.f.n {
            return 1;
        }
        let mut cand = BitSet::full(c.g.n);
        let ind = c.mode == Mode::Ind;
        for (i, &u) in c.img.iter().enumerate() {
            let inn = &c.ins[u * c.words..(u + 1) * c.words];
            // j is an out-neighbour of u iff u is in j's in-row; test via u's out-row
            if c.f.has_edge(i, j) {
                cand.and_assign(c.g.row(u));
            } else if ind {
                cand.and_not_assign(c.g.row(u));
            }
            if c.f.has_edge(j, i) {
                cand.and_assign(inn);
            } else if ind {
                cand.and_not_assign(inn);
            }
        }
        if c.f.has_loop(j) {
            cand.and_assign(c.loops.words());
        } else if ind {
            cand.and_not_assign(c.loops.words());
        }
        if c.mode != Mode::Hom {
            cand.and_not_assign(c.used.words());
        }
        if j + 1 == c.f.n {
            return cand.count() as u128;
        }
        let mut total = 0;
        for v in cand.iter() {
            c.img.push(v);
            c.used.insert(v);
            total += go(c);
            c.used.remove(v);
            c.img.pop();
        }
        total
    }

    let mut ctx = Ctx { f, g, ins: &ins, loops: &loops, words, mode, img: Vec::with_capacity(k), used: BitSet::empty(g.n) };
    Ok(go(&mut ctx))
}

/// `hom(F, G) / n^k`, i.e. `P(F ⊆ G[k])` for `k` host vertices drawn with
/// replacement.
pub fn directed_t(f: &DirectedGraph, g: &DirectedGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Hom)?;
    Ok(Rational::new(BigInt::from(c), num_traits::pow(BigInt::from(g.n), f.n)))
}

pub fn directed_t_inj(f: &DirectedGraph, g: &DirectedGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Inj)?;
    if c == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(BigInt::from(c), falling(g.n, f.n)))
}

pub fn directed_t_ind(f: &DirectedGraph, g: &DirectedGraph) -> Result<Rational> {
    let c = count_maps(f, g, Mode::Ind)?;
    if c == 0 {
        return Ok(Rational::zero());
    }
    Ok(Rational::new(BigInt::from(c), falling(g.n, f.n)))
}

/// `|t - t_inj|` against `v(F)^2 / (2 v(G))`.
pub fn directed_bound_check(f: &DirectedGraph, g: &DirectedGraph) -> Result<crate::density::BoundCheck> {
    use num_traits::Signed;
    let gap = (directed_t(f, g)? - directed_t_inj(f, g)?).abs();
    let k = f.n as i64;
    let bound = frac(k * k, 2 * g.n as i64);
    let ok = gap <= bound;
    Ok(crate::density::BoundCheck { gap, bound, ok })
}

/// Index of `W_αβ` in [`DirectedKernelQuintuple::blocks`].
pub fn pair_index(alpha: bool, beta: bool) -> usize {
    2 * alpha as usize + beta as usize
}

/// First constraint a quintuple breaks.
#[derive(Clone, Debug, PartialEq)]
pub enum KernelViolation {
    /// `Σ_αβ W_αβ(a, b) ≠ 1`.
    Normalisation { a: usize, b: usize, sum: Rational },
    /// `W_αβ(a, b) ≠ W_βα(b, a)`.
    Transpose { alpha: bool, beta: bool, a: usize, b: usize },
}

impl fmt::Display for KernelViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelViolation::Normalisation { a, b, sum } => {
                write!(f, "W00+W01+W10+W11 at blocks ({a}, {b}) sums to {sum}, not 1")
            }
            KernelViolation::Transpose { alpha, beta, a, b } => {
                let (x, y) = (*alpha as u8, *beta as u8);
                write!(f, "W{x}{y}({a}, {b}) differs from W{y}{x}({b}, {a})")
            }
        }
    }
}

/// Outcome of [`validate_quintuple`].
#[derive(Clone, Debug, PartialEq)]
pub enum KernelVerdict {
    Valid,
    Invalid(KernelViolation),
}

impl KernelVerdict {
    pub fn is_valid(&self) -> bool {
        matches!(self, KernelVerdict::Valid)
    }
}

/// Step-kernel quintuple `(W00, W01, W10, W11, w)` on common blocks.
/// Construction checks shapes and ranges only; see [`validate_quintuple`].
#[derive(Clone, PartialEq)]
pub struct DirectedKernelQuintuple {
    mu: Vec<Rational>,
    blocks: [Vec<Vec<Rational>>; 4],
    w: Vec<bool>,
    cum: Vec<f64>,
    // per (a, b): cumulative law over W00, W01, W10, W11
    pair_cum: Vec<[f64; 4]>,
}

impl DirectedKernelQuintuple {
    pub fn new(mu: Vec<Rational>, blocks: [Vec<Vec<Rational>>; 4], w: Vec<bool>) -> Result<Self> {
        let mu = normalise_measures(mu)?;
        let m = mu.len();
        if blocks.iter().any(|b| b.len() != m || b.iter().any(|r| r.len() != m)) {
            return input(format!("each of W00, W01, W10, W11 must be {m}x{m}"));
        }
        if w.len() != m {
            return input(format!("loop vector must have {m} entries"));
        }
        if blocks.iter().flatten().flatten().any(|x| !unit_interval(x)) {
            return input("kernel entries must lie in [0, 1]");
        }
        let cum = cumulative(&mu.iter().map(to_f64).collect::<Vec<_>>());
        let pair_cum = (0..m * m)
            .map(|ab| {
                let (a, b) = (ab / m, ab % m);
                let mut acc = 0.0;
                let mut c = [0.0; 4];
                for (i, blk) in blocks.iter().enumerate() {
                    acc += to_f64(&blk[a][b]);
                    c[i] = acc;
                }
                c
            })
            .collect();
        Ok(DirectedKernelQuintuple { mu, blocks, w, cum, pair_cum })
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn measures(&self) -> &[Rational] {
        &self.mu
    }

    /// `[W00, W01, W10, W11]`.
    pub fn blocks(&self) -> &[Vec<Vec<Rational>>; 4] {
        &self.blocks
    }

    pub fn entry(&self, alpha: bool, beta: bool, a: usize, b: usize) -> &Rational {
        &self.blocks[pair_index(alpha, beta)][a][b]
    }

    pub fn loops(&self) -> &[bool] {
        &self.w
    }

    /// `P(i → j)` for distinct `i`, `j`: `Σ_{a,b} μ_a μ_b (W10 + W11)(a, b)`.
    pub fn edge_marginal(&self) -> Rational {
        let m = self.m();
        let mut total = Rational::zero();
        for a in 0..m {
            for b in 0..m {
                total += &self.mu[a] * &self.mu[b] * (self.entry(true, false, a, b) + self.entry(true, true, a, b));
            }
        }
        total
    }

    /// `P(loop at i) = Σ_a μ_a w(a)`.
    pub fn loop_marginal(&self) -> Rational {
        self.mu.iter().zip(&self.w).filter(|(_, &l)| l).map(|(m, _)| m.clone()).sum()
    }
}

impl fmt::Debug for DirectedKernelQuintuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |b: &Vec<Vec<Rational>>| b.iter().map(|r| r.iter().map(to_f64).collect::<Vec<_>>()).collect::<Vec<_>>();
        f.debug_struct("DirectedKernelQuintuple")
            .field("mu", &self.mu.iter().map(to_f64).collect::<Vec<_>>())
            .field("W00", &show(&self.blocks[0]))
            .field("W01", &show(&self.blocks[1]))
            .field("W10", &show(&self.blocks[2]))
            .field("W11", &show(&self.blocks[3]))
            .field("w", &self.w)
            .finish()
    }
}

/// Checks normalisation and transpose symmetry exactly, scanning block pairs
/// in row-major order.
pub fn validate_quintuple(k: &DirectedKernelQuintuple) -> KernelVerdict {
    let m = k.m();
    for a in 0..m {
        for b in 0..m {
            let sum: Rational = k.blocks.iter().map(|blk| &blk[a][b]).sum();
            if !sum.is_one() {
                return KernelVerdict::Invalid(KernelViolation::Normalisation { a, b, sum });
            }
            for alpha in [false, true] {
                for beta in [false, true] {
                    if k.entry(alpha, beta, a, b) != k.entry(beta, alpha, b, a) {
                        return KernelVerdict::Invalid(KernelViolation::Transpose { alpha, beta, a, b });
                    }
                }
            }
        }
    }
    KernelVerdict::Valid
}

fn require_valid(k: &DirectedKernelQuintuple) -> Result<()> {
    match validate_quintuple(k) {
        KernelVerdict::Valid => Ok(()),
        KernelVerdict::Invalid(v) => input(format!("invalid directed kernel: {v}")),
    }
}

/// Random tournament: every pair gets exactly one arc, direction fair, no
/// loops.
pub fn tournament_kernel() -> DirectedKernelQuintuple {
    let one = |x: Rational| vec![vec![x]];
    DirectedKernelQuintuple::new(vec![int(1)], [one(int(0)), one(frac(1, 2)), one(frac(1, 2)), one(int(0))], vec![false])
        .expect("tournament kernel is well formed")
}

/// Quadruple on blocks × loop flags together with a loop probability `p`.
/// Extended index `2a + flag` addresses block `a` with loop flag `flag`.
#[derive(Clone, PartialEq)]
pub struct DirectedKernelQuadruplePlusP {
    mu: Vec<Rational>,
    p: Rational,
    lifted: DirectedKernelQuintuple,
}

impl DirectedKernelQuadruplePlusP {
    /// `blocks` are `2m x 2m` over the extended index.
    pub fn new(mu: Vec<Rational>, blocks: [Vec<Vec<Rational>>; 4], p: Rational) -> Result<Self> {
        let mu = normalise_measures(mu)?;
        if !unit_interval(&p) {
            return input("loop probability must lie in [0, 1]");
        }
        let q = int(1) - &p;
        let ext_mu = mu.iter().flat_map(|m| [m * &q, m * &p]).collect();
        let w = (0..2 * mu.len()).map(|i| i % 2 == 1).collect();
        let lifted = DirectedKernelQuintuple::new(ext_mu, blocks, w)?;
        Ok(DirectedKernelQuadruplePlusP { mu, p, lifted })
    }

    /// Pair law independent of the loop flags.
    pub fn flag_blind(mu: Vec<Rational>, blocks: [Vec<Vec<Rational>>; 4], p: Rational) -> Result<Self> {
        let m = mu.len();
        if blocks.iter().any(|b| b.len() != m || b.iter().any(|r| r.len() != m)) {
            return input(format!("each of W00, W01, W10, W11 must be {m}x{m}"));
        }
        let ext = blocks.map(|b| (0..2 * m).map(|i| (0..2 * m).map(|j| b[i / 2][j / 2].clone()).collect()).collect());
        Self::new(mu, ext, p)
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn measures(&self) -> &[Rational] {
        &self.mu
    }

    pub fn p(&self) -> &Rational {
        &self.p
    }

    /// Equivalent quintuple on `2m` blocks with measures `μ_a (1-p)`, `μ_a p`
    /// and `w` equal to the flag.
    pub fn to_quintuple(&self) -> &DirectedKernelQuintuple {
        &self.lifted
    }
}

impl fmt::Debug for DirectedKernelQuadruplePlusP {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DirectedKernelQuadruplePlusP").field("p", &to_f64(&self.p)).field("lifted", &self.lifted).finish()
    }
}

/// Same constraints as a quintuple, over the extended index.
pub fn validate_quadruple(k: &DirectedKernelQuadruplePlusP) -> KernelVerdict {
    validate_quintuple(&k.lifted)
}

fn sample_unchecked<R: Rng + ?Sized>(k: &DirectedKernelQuintuple, n: usize, rng: &mut R) -> DirectedGraph {
    let m = k.m();
    let ys: Vec<usize> = (0..n).map(|_| locate(&k.cum, rng.gen())).collect();
    let mut g = DirectedGraph::empty(n);
    for (i, &y) in ys.iter().enumerate() {
        if k.w[y] {
            g.set_edge(i, i, true);
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            let c = &k.pair_cum[ys[i] * m + ys[j]];
            let u: f64 = rng.gen::<f64>() * c[3];
            let cell = c.iter().position(|&x| u < x).unwrap_or(3);
            if cell >= 2 {
                g.set_edge(i, j, true);
            }
            if cell % 2 == 1 {
                g.set_edge(j, i, true);
            }
        }
    }
    g
}

/// `Ĝ(n, W)`: iid latent blocks `Y_i`, loop at `i` iff `w(Y_i)`, and for each
/// `i < j` the pair `(X_ij, X_ji)` drawn from `W_··(Y_i, Y_j)`.
pub fn sample_directed<R: Rng + ?Sized>(k: &DirectedKernelQuintuple, n: usize, rng: &mut R) -> Result<DirectedGraph> {
    if n == 0 {
        return Err(Error::Precondition("need at least one vertex".into()));
    }
    require_valid(k)?;
    Ok(sample_unchecked(k, n, rng))
}

/// Loops iid Bernoulli(`p`); pair law on blocks × flags.
pub fn sample_directed_qp<R: Rng + ?Sized>(k: &DirectedKernelQuadruplePlusP, n: usize, rng: &mut R) -> Result<DirectedGraph> {
    sample_directed(&k.lifted, n, rng)
}

/// Loop indicators `X_11, ..., X_nn` of `Ĝ(n, W)`. These depend only on the
/// latent blocks, so the pairs are not drawn.
pub fn loop_sequence_law<R: Rng + ?Sized>(k: &DirectedKernelQuintuple, n: usize, rng: &mut R) -> Result<Vec<bool>> {
    require_valid(k)?;
    Ok((0..n).map(|_| k.w[locate(&k.cum, rng.gen())]).collect())
}

fn kernel_density(f: &DirectedGraph, k: &DirectedKernelQuintuple, induced: bool) -> Result<Rational> {
    require_valid(k)?;
    let n = f.n;
    check_work(k.m(), n)?;
    // per pair i < j and block pair (a, b): the factor contributed
    let m = k.m();
    let pair_factor = |i: usize, j: usize, a: usize, b: usize| -> Rational {
        let (x, y) = (f.has_edge(i, j), f.has_edge(j, i));
        if induced {
            return k.entry(x, y, a, b).clone();
        }
        let mut s = Rational::zero();
        for alpha in [x, true] {
            for beta in [y, true] {
                s += k.entry(alpha, beta, a, b);
                if y {
                    break;
                }
            }
            if x {
                break;
            }
        }
        s
    };
    let factors: Vec<Vec<Vec<Rational>>> = (0..n * n)
        .map(|ij| {
            let (i, j) = (ij / n, ij % n);
            if i >= j {
                return Vec::new();
            }
            (0..m).map(|a| (0..m).map(|b| pair_factor(i, j, a, b)).collect()).collect()
        })
        .collect();

    fn go(f: &DirectedGraph, k: &DirectedKernelQuintuple, induced: bool, factors: &[Vec<Vec<Rational>>], z: &mut Vec<usize>, acc: Rational) -> Rational {
        let n = f.n;
        let j = z.len();
        if j == n {
            return acc;
        }
        let mut total = Rational::zero();
        for a in 0..k.m() {
            if k.mu[a].is_zero() {
                continue;
            }
            let lp = f.has_loop(j);
            if (lp && !k.w[a]) || (induced && !lp && k.w[a]) {
                continue;
            }
            let mut next = &acc * &k.mu[a];
            for (i, &zi) in z.iter().enumerate() {
                next *= &factors[i * n + j][zi][a];
                if next.is_zero() {
                    break;
                }
            }
            if next.is_zero() {
                continue;
            }
            z.push(a);
            total += go(f, k, induced, factors, z, next);
            z.pop();
        }
        total
    }
    Ok(go(f, k, induced, &factors, &mut Vec::with_capacity(n), Rational::one()))
}

/// `P(F ⊆ Ĝ(k, W))` as an exact block sum.
pub fn kernel_t(f: &DirectedGraph, k: &DirectedKernelQuintuple) -> Result<Rational> {
    kernel_density(f, k, false)
}

/// `P(Ĝ(k, W) = F)` as an exact block sum.
pub fn kernel_t_ind(f: &DirectedGraph, k: &DirectedKernelQuintuple) -> Result<Rational> {
    kernel_density(f, k, true)
}

impl Outcome for DirectedGraph {
    type Shape = usize;

    fn shape(&self) -> usize {
        self.n
    }

    fn universe(k: usize) -> Result<Vec<Self>> {
        if k == 0 || k > DIRECTED_PREFIX_CAP {
            return capacity(format!("directed prefix size {k} outside 1..={DIRECTED_PREFIX_CAP}"));
        }
        let cells = k * k;
        Ok((0u64..1 << cells)
            .map(|mask| {
                let mut g = DirectedGraph::empty(k);
                for c in 0..cells {
                    if mask >> c & 1 == 1 {
                        g.set_edge(c / k, c % k, true);
                    }
                }
                g
            })
            .collect())
    }

    fn orbit_key(&self) -> Result<Self> {
        Ok(canonicalize_directed(self)?.1)
    }
}

/// Exact law of `Ĝ(k, W)`.
pub fn directed_prefix_law_exact(kern: &DirectedKernelQuintuple, k: usize) -> Result<PrefixLaw<DirectedGraph>> {
    let mut probs = BTreeMap::new();
    for f in DirectedGraph::universe(k)? {
        let p = kernel_t_ind(&f, kern)?;
        if !p.is_zero() {
            probs.insert(f, p);
        }
    }
    PrefixLaw::exact(k, probs)
}

/// Source of exchangeable infinite directed graphs.
#[derive(Clone, Debug)]
pub enum DirectedSource {
    Kernel(DirectedKernelQuintuple),
    /// Kernel drawn once per infinite graph.
    Mixture(Vec<(f64, DirectedKernelQuintuple)>),
}

impl DirectedSource {
    pub fn kernel(k: DirectedKernelQuintuple) -> Result<Self> {
        require_valid(&k)?;
        Ok(DirectedSource::Kernel(k))
    }

    /// Mixture with positive weights summing to one (within 1e-9).
    pub fn mixture(parts: Vec<(f64, DirectedKernelQuintuple)>) -> Result<Self> {
        if parts.is_empty() || parts.iter().any(|(p, _)| !(*p > 0.0)) {
            return input("mixture weights must be positive and nonempty");
        }
        let total: f64 = parts.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-9 {
            return input(format!("mixture weights sum to {total}, not 1"));
        }
        for (_, k) in &parts {
            require_valid(k)?;
        }
        Ok(DirectedSource::Mixture(parts))
    }

    pub fn sample_prefix(&self, n: usize, rng: &mut StreamRng) -> Result<DirectedGraph> {
        match self {
            DirectedSource::Kernel(k) => sample_directed(k, n, rng),
            DirectedSource::Mixture(parts) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = &parts[parts.len() - 1].1;
                for (p, k) in parts {
                    acc += p;
                    if u < acc {
                        chosen = k;
                        break;
                    }
                }
                sample_directed(chosen, n, rng)
            }
        }
    }
}

pub fn directed_prefix_law_empirical<R: Rng + ?Sized>(
    src: &DirectedSource,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<PrefixLaw<DirectedGraph>> {
    if k == 0 || k > DIRECTED_PREFIX_CAP {
        return capacity(format!("directed prefix size {k} outside 1..={DIRECTED_PREFIX_CAP}"));
    }
    empirical_law(k, samples, rng, |r| src.sample_prefix(k, r))
}

/// Product criterion on vertex-disjoint directed patterns; `(u, u)` is a
/// loop.
pub fn directed_extremality_test<R: Rng + ?Sized>(
    src: &DirectedSource,
    pairs: &[(EdgePattern<usize>, EdgePattern<usize>)],
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<ExtremalityReport> {
    check_disjoint(pairs)?;
    let k = pairs
        .iter()
        .flat_map(|(a, b)| a.vertices().iter().chain(b.vertices()))
        .max()
        .map_or(1, |m| m + 1);
    product_criterion(
        pairs.len(),
        samples,
        alpha,
        rng,
        |r| src.sample_prefix(k, r),
        |h, i| {
            let has = |u, v| h.has_edge(u, v);
            (pairs[i].0.holds(has), pairs[i].1.holds(has))
        },
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exchangeable::exchangeability_test;
    use crate::rng::stream;

    fn one(x: Rational) -> Vec<Vec<Rational>> {
        vec![vec![x]]
    }

    #[test]
    fn quintuple_validation() {
        assert!(validate_quintuple(&tournament_kernel()).is_valid());
        let empty = DirectedKernelQuintuple::new(vec![int(1)], [one(int(1)), one(int(0)), one(int(0)), one(int(0))], vec![false]).unwrap();
        assert!(validate_quintuple(&empty).is_valid());
        let skew = DirectedKernelQuintuple::new(vec![int(1)], [one(int(0)), one(int(1)), one(int(0)), one(int(0))], vec![false]).unwrap();
        assert_eq!(
            validate_quintuple(&skew),
            KernelVerdict::Invalid(KernelViolation::Transpose { alpha: false, beta: true, a: 0, b: 0 })
        );
        let short = DirectedKernelQuintuple::new(vec![int(1)], [one(int(0)), one(frac(1, 3)), one(frac(1, 3)), one(int(0))], vec![false]).unwrap();
        assert!(matches!(validate_quintuple(&short), KernelVerdict::Invalid(KernelViolation::Normalisation { .. })));
        assert!(sample_directed(&skew, 3, &mut stream(0, 0)).is_err());
    }

    #[test]
    fn tournament_densities() {
        let t = tournament_kernel();
        let arc = DirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(kernel_t(&arc, &t).unwrap(), frac(1, 2));
        let two_cycle = DirectedGraph::from_edges(2, &[(0, 1), (1, 0)]).unwrap();
        assert_eq!(kernel_t(&two_cycle, &t).unwrap(), int(0));
        assert_eq!(kernel_t(&DirectedGraph::cycle(3), &t).unwrap(), frac(1, 8));
        let lp = DirectedGraph::from_edges(1, &[(0, 0)]).unwrap();
        assert_eq!(kernel_t(&lp, &t).unwrap(), int(0));
        assert_eq!(t.edge_marginal(), frac(1, 2));
    }

    #[test]
    fn tournament_samples() {
        let t = tournament_kernel();
        let mut rng = stream(3, 0);
        for _ in 0..50 {
            let g = sample_directed(&t, 6, &mut rng).unwrap();
            assert_eq!(g.loop_count(), 0);
            for i in 0..6 {
                for j in i + 1..6 {
                    assert!(g.has_edge(i, j) ^ g.has_edge(j, i));
                }
            }
        }
    }

    #[test]
    fn host_counts() {
        let c3 = DirectedGraph::cycle(3);
        let arc = DirectedGraph::from_edges(2, &[(0, 1)]).unwrap();
        assert_eq!(directed_t_inj(&arc, &c3).unwrap(), frac(3, 6));
        assert_eq!(directed_t(&arc, &c3).unwrap(), frac(3, 9));
        assert_eq!(directed_t_ind(&c3, &c3).unwrap(), frac(3, 6));
        // with a loop at 0, mapping both ends to 0 becomes a homomorphism
        let mut looped = c3.clone();
        looped.set_edge(0, 0, true);
        assert_eq!(directed_t(&arc, &looped).unwrap(), frac(4, 9));
        assert_eq!(directed_t_inj(&arc, &looped).unwrap(), frac(3, 6));
        assert_eq!(directed_t_ind(&arc, &looped).unwrap(), frac(1, 6));
    }

    #[test]
    fn canonical_form_is_invariant() {
        let g = DirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 0), (3, 3), (3, 1)]).unwrap();
        let (code, _) = canonicalize_directed(&g).unwrap();
        for perm in [[1, 2, 3, 0], [3, 2, 1, 0], [0, 2, 1, 3]] {
            assert_eq!(canonicalize_directed(&g.permute(&perm)).unwrap().0, code);
        }
        let rev = DirectedGraph::from_edges(4, &[(1, 0), (2, 1), (0, 2), (3, 3), (1, 3)]).unwrap();
        assert_ne!(canonicalize_directed(&rev).unwrap().0, code);
    }

    #[test]
    fn loop_probability_lifts() {
        let blocks = [one(frac(1, 4)), one(frac(1, 4)), one(frac(1, 4)), one(frac(1, 4))];
        for (p, expect) in [(int(0), 0), (int(1), 7)] {
            let k = DirectedKernelQuadruplePlusP::flag_blind(vec![int(1)], blocks.clone(), p).unwrap();
            assert!(validate_quadruple(&k).is_valid());
            let g = sample_directed_qp(&k, 7, &mut stream(5, 0)).unwrap();
            assert_eq!(g.loop_count(), expect);
        }
        let k = DirectedKernelQuadruplePlusP::flag_blind(vec![int(1)], blocks, frac(3, 10)).unwrap();
        assert_eq!(k.to_quintuple().loop_marginal(), frac(3, 10));
        let lp = DirectedGraph::from_edges(1, &[(0, 0)]).unwrap();
        assert_eq!(kernel_t(&lp, k.to_quintuple()).unwrap(), frac(3, 10));
    }

    #[test]
    fn exact_prefix_law_sums_to_one_and_is_exchangeable() {
        let half = frac(1, 2);
        let k = DirectedKernelQuintuple::new(
            vec![frac(1, 3), frac(2, 3)],
            [
                vec![vec![half.clone(), frac(1, 5)], vec![frac(1, 5), int(0)]],
                vec![vec![frac(1, 4), frac(3, 5)], vec![frac(1, 10), frac(1, 2)]],
                vec![vec![frac(1, 4), frac(1, 10)], vec![frac(3, 5), frac(1, 2)]],
                vec![vec![int(0), frac(1, 10)], vec![frac(1, 10), int(0)]],
            ],
            vec![true, false],
        )
        .unwrap();
        assert!(validate_quintuple(&k).is_valid());
        let law = directed_prefix_law_exact(&k, 3).unwrap();
        assert_eq!(law.total_mass(), 1.0);
        assert!(exchangeability_test(&law, 0.01).unwrap().is_consistent());
    }
}
