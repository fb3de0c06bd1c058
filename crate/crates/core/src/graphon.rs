//! Graphons: symmetric kernels `W: [0,1]^2 -> [0,1]`.
//!
//! [`StepGraphon`] is the exact class: piecewise constant on a finite block
//! partition with rational block measures, so `t(F, W)` is a finite sum.
//! [`GeneralGraphon`] wraps an arbitrary function and supports sampling and
//! Monte Carlo densities only.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::density::{search_order, DensityEstimate, PATTERN_CAP};
use crate::error::{capacity, input, Error, Result};
use crate::graph::LabelledGraph;
use crate::rational::{self, int, to_f64, Rational};
use crate::rng::chunked;

/// Upper limit on `m^k` terms in an exact block-assignment sum.
pub const WORK_CAP: f64 = 1e7;

/// Tolerance on block measures summing to one before exact renormalisation.
pub const MEASURE_TOLERANCE: f64 = 1e-12;

/// Something a W-random graph can be drawn from.
pub trait Kernel: Sync {
    /// Latent type of a vertex.
    type Point: Copy + Send + Sync;

    fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    /// Edge probability between two latent points.
    fn value(&self, a: Self::Point, b: Self::Point) -> f64;
}

/// Checks and exactly renormalises block measures.
pub(crate) fn normalise_measures(mu: Vec<Rational>) -> Result<Vec<Rational>> {
    if mu.is_empty() {
        return input("at least one block is required");
    }
    if mu.iter().any(|m| m.is_negative()) {
        return input("block measures must be nonnegative");
    }
    let total: Rational = mu.iter().sum();
    if (to_f64(&total) - 1.0).abs() > MEASURE_TOLERANCE || total.is_zero() {
        return input(format!("block measures sum to {}, not 1", to_f64(&total)));
    }
    Ok(if total.is_one() { mu } else { mu.into_iter().map(|m| m / &total).collect() })
}

pub(crate) fn unit_interval(x: &Rational) -> bool {
    !x.is_negative() && x <= &Rational::one()
}

pub(crate) fn cumulative(mu: &[f64]) -> Vec<f64> {
    let mut acc = 0.0;
    mu.iter()
        .map(|m| {
            acc += m;
            acc
        })
        .collect()
}

/// Index of the block containing `u` for cumulative measures `cum`.
pub(crate) fn locate(cum: &[f64], u: f64) -> usize {
    let i = cum.partition_point(|&c| c <= u);
    // guard against float rounding at the right end; skip zero-measure tails
    let mut i = i.min(cum.len() - 1);
    while i > 0 && cum[i] == cum[i - 1] {
        i -= 1;
    }
    i
}

/// Symmetric step kernel with `m` blocks.
#[derive(Clone, PartialEq)]
pub struct StepGraphon {
    mu: Vec<Rational>,
    w: Vec<Vec<Rational>>,
    mu_f: Vec<f64>,
    cum: Vec<f64>,
    w_f: Vec<f64>,
}

impl StepGraphon {
    /// Validates symmetry, range and measures. Measures within
    /// [`MEASURE_TOLERANCE`] of summing to one are rescaled to sum to one
    /// exactly.
    pub fn new(mu: Vec<Rational>, w: Vec<Vec<Rational>>) -> Result<Self> {
        let mu = normalise_measures(mu)?;
        let m = mu.len();
        if w.len() != m || w.iter().any(|r| r.len() != m) {
            return input(format!("kernel must be {m}x{m}"));
        }
        for a in 0..m {
            for b in 0..m {
                if !unit_interval(&w[a][b]) {
                    return input(format!("entry ({a}, {b}) outside [0, 1]"));
                }
                if w[a][b] != w[b][a] {
                    return input(format!("kernel not symmetric at ({a}, {b})"));
                }
            }
        }
        let mu_f: Vec<f64> = mu.iter().map(to_f64).collect();
        let cum = cumulative(&mu_f);
        let w_f = w.iter().flatten().map(to_f64).collect();
        Ok(StepGraphon { mu, w, mu_f, cum, w_f })
    }

    /// Builds from floats through their shortest decimal representation,
    /// so `0.2` means exactly `1/5`.
    pub fn from_f64(mu: &[f64], w: &[Vec<f64>]) -> Result<Self> {
        let conv = |x: f64| rational::from_f64(x).ok_or_else(|| Error::Input(format!("not a finite number: {x}")));
        let mu = mu.iter().map(|&x| conv(x)).collect::<Result<_>>()?;
        let w = w
            .iter()
            .map(|r| r.iter().map(|&x| conv(x)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        Self::new(mu, w)
    }

    /// `W ≡ p`.
    pub fn constant(p: Rational) -> Result<Self> {
        Self::new(vec![int(1)], vec![vec![p]])
    }

    /// Two-type kernel: a `θ` fraction of "boys" connected among themselves
    /// with probability `p`, "girls" with `p'`, across with `p''`.
    pub fn boys_girls(theta: f64, p: f64, p_prime: f64, p_dblprime: f64) -> Result<Self> {
        for (name, x) in [("theta", theta), ("p", p), ("p'", p_prime), ("p''", p_dblprime)] {
            if !(0.0..=1.0).contains(&x) {
                return input(format!("{name} = {x} outside [0, 1]"));
            }
        }
        Self::from_f64(&[theta, 1.0 - theta], &[vec![p, p_dblprime], vec![p_dblprime, p_prime]])
    }

    /// The adjacency matrix of `g` on `v(g)` equal blocks; `t(F, W) = t(F, g)`.
    pub fn from_graph(g: &LabelledGraph) -> Self {
        let n = g.n();
        let mu = vec![Rational::new(1.into(), (n as i64).into()); n];
        let w = (0..n)
            .map(|a| (0..n).map(|b| int(g.has_edge(a, b) as i64)).collect())
            .collect();
        Self::new(mu, w).expect("adjacency kernel is valid")
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn measures(&self) -> &[Rational] {
        &self.mu
    }

    pub fn entry(&self, a: usize, b: usize) -> &Rational {
        &self.w[a][b]
    }

    pub fn entries(&self) -> &[Vec<Rational>] {
        &self.w
    }

    /// Block of a point `x ∈ [0, 1)`.
    pub fn block_of(&self, x: f64) -> usize {
        locate(&self.cum, x)
    }

    /// `W(x, y)`.
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let m = self.m();
        self.w_f[self.block_of(x) * m + self.block_of(y)]
    }

    /// Exact `t(F, W) = Σ_z Π_i μ(z_i) Π_{ij ∈ E(F)} w(z_i, z_j)`.
    pub fn exact_density(&self, f: &LabelledGraph) -> Result<Rational> {
        exact_density(f, self)
    }
}

impl fmt::Debug for StepGraphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mu: Vec<String> = self.mu.iter().map(rational::format_exact).collect();
        let w: Vec<Vec<String>> = self.w.iter().map(|r| r.iter().map(rational::format_exact).collect()).collect();
        f.debug_struct("StepGraphon").field("mu", &mu).field("w", &w).finish()
    }
}

impl Kernel for StepGraphon {
    type Point = usize;

    fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        locate(&self.cum, rng.gen::<f64>())
    }

    fn value(&self, a: usize, b: usize) -> f64 {
        self.w_f[a * self.m() + b]
    }
}

type KernelFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// Arbitrary symmetric kernel given as a function.
#[derive(Clone)]
pub struct GeneralGraphon {
    eval: Arc<KernelFn>,
}

impl GeneralGraphon {
    /// Wraps `eval`, spot-checking symmetry and range on a 17x17 grid.
    pub fn new(eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        const GRID: usize = 16;
        for i in 0..=GRID {
            for j in 0..=GRID {
                let (x, y) = (i as f64 / GRID as f64, j as f64 / GRID as f64);
                let v = eval(x, y);
                if !(0.0..=1.0).contains(&v) {
                    return input(format!("W({x}, {y}) = {v} outside [0, 1]"));
                }
                if v != eval(y, x) {
                    return input(format!("W not symmetric at ({x}, {y})"));
                }
            }
        }
        Ok(GeneralGraphon { eval: Arc::new(eval) })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.eval)(x, y)
    }
}

impl fmt::Debug for GeneralGraphon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("GeneralGraphon(..)")
    }
}

impl Kernel for GeneralGraphon {
    type Point = f64;

    fn draw_point<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        rng.gen()
    }

    fn value(&self, a: f64, b: f64) -> f64 {
        (self.eval)(a, b)
    }
}

/// `G(n, W)`: iid latent points, each pair joined independently with
/// probability `W(X_i, X_j)`.
pub fn sample_w_random<K: Kernel, R: Rng + ?Sized>(w: &K, n: usize, rng: &mut R) -> Result<LabelledGraph> {
    if n == 0 {
        return Err(Error::Precondition("need at least one vertex".into()));
    }
    let pts: Vec<K::Point> = (0..n).map(|_| w.draw_point(rng)).collect();
    Ok(sample_given_points(w, &pts, rng))
}

/// Edges of a W-random graph conditional on the latent points.
pub fn sample_given_points<K: Kernel, R: Rng + ?Sized>(w: &K, pts: &[K::Point], rng: &mut R) -> LabelledGraph {
    let n = pts.len();
    let mut g = LabelledGraph::empty(n);
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen::<f64>() < w.value(pts[i], pts[j]) {
                g.set_edge(i, j, true);
            }
        }
    }
    g
}

pub(crate) fn check_work(m: usize, k: usize) -> Result<()> {
    if k > PATTERN_CAP {
        return capacity(format!("pattern has {k} vertices, cap is {PATTERN_CAP}"));
    }
    if (m as f64).powi(k as i32) > WORK_CAP {
        return capacity(format!("{m}^{k} block assignments exceed the work cap {WORK_CAP}"));
    }
    Ok(())
}

/// Exact `t(F, W)` for a step graphon.
pub fn exact_density(f: &LabelledGraph, w: &StepGraphon) -> Result<Rational> {
    check_work(w.m(), f.n())?;
    let order = search_order(f);
    let mut pos = vec![0; f.n()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let back: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(i, &v)| f.neighbours(v).map(|u| pos[u]).filter(|&p| p < i).collect())
        .collect();

    fn go(w: &StepGraphon, back: &[Vec<usize>], z: &mut Vec<usize>, acc: &Rational) -> Rational {
        let depth = z.len();
        if depth == back.len() {
            return acc.clone();
        }
        let mut total = Rational::zero();
        for b in 0..w.m() {
            if w.mu[b].is_zero() {
                continue;
            }
            let mut factor = acc * &w.mu[b];
            for &p in &back[depth] {
                if factor.is_zero() {
                    break;
                }
                factor *= &w.w[z[p]][b];
            }
            if factor.is_zero() {
                continue;
            }
            z.push(b);
            total += go(w, back, z, &factor);
            z.pop();
        }
        total
    }

    Ok(go(w, &back, &mut Vec::with_capacity(f.n()), &Rational::one()))
}

/// Exact `P(G(k, W) = F)`: non-edges contribute `1 - W`.
pub fn exact_induced_density(f: &LabelledGraph, w: &StepGraphon) -> Result<Rational> {
    let k = f.n();
    check_work(w.m(), k)?;
    fn go(f: &LabelledGraph, w: &StepGraphon, z: &mut Vec<usize>, acc: &Rational) -> Rational {
        let j = z.len();
        if j == f.n() {
            return acc.clone();
        }
        let mut total = Rational::zero();
        for b in 0..w.m() {
            if w.mu[b].is_zero() {
                continue;
            }
            let mut factor = acc * &w.mu[b];
            for (i, &a) in z.iter().enumerate() {
                if factor.is_zero() {
                    break;
                }
                if f.has_edge(i, j) {
                    factor *= &w.w[a][b];
                } else {
                    factor *= int(1) - &w.w[a][b];
                }
            }
            if factor.is_zero() {
                continue;
            }
            z.push(b);
            total += go(f, w, z, &factor);
            z.pop();
        }
        total
    }
    Ok(go(f, w, &mut Vec::with_capacity(k), &Rational::one()))
}

/// Monte Carlo `t(F, W)`: average of `Π_{ij ∈ E(F)} W(x_i, x_j)` over iid
/// uniform points.
pub fn mc_density<K: Kernel, R: Rng + ?Sized>(
    f: &LabelledGraph,
    w: &K,
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<DensityEstimate> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let edges = f.edges();
    let k = f.n();
    let sum = chunked(
        rng,
        samples,
        0.0f64,
        |r, len| {
            let mut s = 0.0;
            let mut pts = Vec::with_capacity(k);
            for _ in 0..len {
                pts.clear();
                pts.extend((0..k).map(|_| w.draw_point(r)));
                s += edges.iter().map(|&(i, j)| w.value(pts[i], pts[j])).product::<f64>();
            }
            s
        },
        |a, b| a + b,
    );
    Ok(DensityEstimate::from_sum(sum, samples, alpha))
}

/// A measure-preserving step map `φ`: new block `j` has measure
/// `pieces[j].1` and is mapped into source block `pieces[j].0`.
///
/// `W^φ(x, y) = W(φ(x), φ(y))` is then the step graphon on the new blocks
/// with `w'(j, l) = w(source(j), source(l))`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockMap {
    source_blocks: usize,
    pieces: Vec<(usize, Rational)>,
}

impl BlockMap {
    pub fn new(source_blocks: usize, pieces: Vec<(usize, Rational)>) -> Self {
        BlockMap { source_blocks, pieces }
    }

    pub fn identity(w: &StepGraphon) -> Self {
        Self::new(w.m(), w.mu.iter().cloned().enumerate().collect())
    }

    /// New block `j` is old block `perm[j]`.
    pub fn permutation(w: &StepGraphon, perm: &[usize]) -> Result<Self> {
        let mut seen = vec![false; w.m()];
        if perm.len() != w.m() {
            return input("permutation length differs from block count");
        }
        for &p in perm {
            if p >= w.m() || std::mem::replace(&mut seen[p], true) {
                return input(format!("{perm:?} is not a permutation of the blocks"));
            }
        }
        Ok(Self::new(w.m(), perm.iter().map(|&p| (p, w.mu[p].clone())).collect()))
    }

    /// Splits `block` into `parts` equal pieces, keeping the others.
    pub fn split(w: &StepGraphon, block: usize, parts: usize) -> Result<Self> {
        if block >= w.m() || parts == 0 {
            return input(format!("cannot split block {block} into {parts} parts"));
        }
        let mut pieces = Vec::new();
        for (a, mu) in w.mu.iter().enumerate() {
            if a == block {
                let piece = mu / int(parts as i64);
                pieces.extend(std::iter::repeat_n((a, piece), parts));
            } else {
                pieces.push((a, mu.clone()));
            }
        }
        Ok(Self::new(w.m(), pieces))
    }

    /// Refines every block to pieces of measure `1/D`, `D` the common
    /// denominator of the measures.
    pub fn equal_grid(w: &StepGraphon, max_pieces: usize) -> Result<Self> {
        let den = w
            .mu
            .iter()
            .fold(num_bigint::BigInt::one(), |acc, m| num_integer::Integer::lcm(&acc, m.denom()));
        let d: usize = num_traits::ToPrimitive::to_usize(&den)
            .filter(|&d| d <= max_pieces)
            .ok_or_else(|| Error::Capacity(format!("common grid of {den} pieces exceeds {max_pieces}")))?;
        let unit = Rational::new(1.into(), den.clone());
        let mut pieces = Vec::with_capacity(d);
        for (a, mu) in w.mu.iter().enumerate() {
            let count = (mu * Rational::from_integer(den.clone())).to_integer();
            let count = num_traits::ToPrimitive::to_usize(&count).expect("count fits");
            pieces.extend(std::iter::repeat_n((a, unit.clone()), count));
        }
        Ok(Self::new(w.m(), pieces))
    }

    pub fn pieces(&self) -> &[(usize, Rational)] {
        &self.pieces
    }

    /// Total new measure mapped into each source block must equal that
    /// block's measure.
    pub fn is_measure_preserving(&self, w: &StepGraphon) -> bool {
        if self.source_blocks != w.m() || self.pieces.iter().any(|(a, m)| *a >= w.m() || m.is_negative()) {
            return false;
        }
        let mut mass = vec![Rational::zero(); w.m()];
        for (a, m) in &self.pieces {
            mass[*a] += m;
        }
        mass == w.mu
    }
}

/// `W^φ` for a measure-preserving block map.
pub fn pushforward(w: &StepGraphon, map: &BlockMap) -> Result<StepGraphon> {
    if !map.is_measure_preserving(w) {
        return input("block map is not measure preserving for this graphon");
    }
    let mu = map.pieces.iter().map(|(_, m)| m.clone()).collect();
    let src: Vec<usize> = map.pieces.iter().map(|(a, _)| *a).collect();
    let kernel = src
        .iter()
        .map(|&a| src.iter().map(|&b| w.w[a][b].clone()).collect())
        .collect();
    StepGraphon::new(mu, kernel)
}
