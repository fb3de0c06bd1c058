//! Exchangeable infinite random graphs, seen through their finite prefixes.
//!
//! An infinite random graph `H` is never materialised; its law is probed
//! through the restrictions `H|k` to the first `k` vertices. This module
//! computes prefix laws of W-random graphs exactly, estimates them from any
//! [`GraphSource`], and runs three diagnostics:
//!
//! * [`exchangeability_test`]: `P(H|k = F)` depends only on the isomorphism
//!   type of `F`;
//! * [`extremality_test`]: `P(H ⊇ F1 ∪ F2) = P(H ⊇ F1) P(H ⊇ F2)` for
//!   vertex-disjoint `F1`, `F2`, which characterises extreme (non-mixture)
//!   laws;
//! * [`martingale_trace`]: `t_ind(F, H|n)` along one nested sample path.
//!
//! The outcome type is abstracted by [`Outcome`] so the bipartite and
//! directed modules reuse the same law and test machinery.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use rand::{Rng, RngCore};

use crate::canon::{all_labelled, canonicalize};
use crate::density::{supergraphs, t_ind, PATTERN_CAP};
use crate::error::{capacity, input, Error, Result};
use crate::graph::LabelledGraph;
use crate::graphon::{exact_density, sample_w_random, GeneralGraphon, StepGraphon, WORK_CAP};
use crate::rational::{int, to_f64, Rational};
use crate::rng::{chunked, stream, StreamRng};
use crate::stats::{product_identity_test, uniformity_chi_square, PairCounts, ProductTest};

/// Largest prefix whose full outcome space is listed.
pub const PREFIX_CAP: usize = 5;

/// A finite array outcome whose law can be tested for invariance under
/// relabelling.
pub trait Outcome: Clone + Ord + fmt::Debug + Send + Sync {
    /// Size descriptor of the outcome space.
    type Shape: Copy + fmt::Debug + PartialEq + Send + Sync;

    fn shape(&self) -> Self::Shape;

    /// Every outcome of the given shape.
    fn universe(shape: Self::Shape) -> Result<Vec<Self>>;

    /// Canonical representative of the orbit under the relabelling group.
    fn orbit_key(&self) -> Result<Self>;
}

impl Outcome for LabelledGraph {
    type Shape = usize;

    fn shape(&self) -> usize {
        self.n()
    }

    fn universe(k: usize) -> Result<Vec<Self>> {
        if k == 0 || k > PREFIX_CAP {
            return capacity(format!("prefix size {k} outside 1..={PREFIX_CAP}"));
        }
        Ok(all_labelled(k))
    }

    fn orbit_key(&self) -> Result<Self> {
        Ok(canonicalize(self)?.graph().clone())
    }
}

#[derive(Clone, Debug, PartialEq)]
enum LawKind<G: Outcome> {
    Exact(BTreeMap<G, Rational>),
    Empirical { counts: BTreeMap<G, u64>, total: u64 },
}

/// Law of a finite prefix, exact or empirical. Outcomes not listed have
/// probability zero.
#[derive(Clone, Debug, PartialEq)]
pub struct PrefixLaw<G: Outcome> {
    shape: G::Shape,
    kind: LawKind<G>,
}

impl<G: Outcome> PrefixLaw<G> {
    /// Exact law; probabilities must be nonnegative and sum to one exactly.
    pub fn exact(shape: G::Shape, probs: BTreeMap<G, Rational>) -> Result<Self> {
        if probs.keys().any(|g| g.shape() != shape) {
            return input("outcome of the wrong shape in law");
        }
        if probs.values().any(|p| p.is_negative()) {
            return input("negative probability in law");
        }
        let total: Rational = probs.values().sum();
        if !total.is_one() {
            return input(format!("probabilities sum to {total}, not 1"));
        }
        Ok(PrefixLaw { shape, kind: LawKind::Exact(probs) })
    }

    pub fn empirical(shape: G::Shape, counts: BTreeMap<G, u64>) -> Result<Self> {
        if counts.keys().any(|g| g.shape() != shape) {
            return input("outcome of the wrong shape in law");
        }
        let total = counts.values().sum();
        if total == 0 {
            return input("empirical law has no samples");
        }
        Ok(PrefixLaw { shape, kind: LawKind::Empirical { counts, total } })
    }

    pub fn shape(&self) -> G::Shape {
        self.shape
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.kind, LawKind::Exact(_))
    }

    /// Sample count of an empirical law.
    pub fn samples(&self) -> Option<u64> {
        match &self.kind {
            LawKind::Exact(_) => None,
            LawKind::Empirical { total, .. } => Some(*total),
        }
    }

    pub fn exact_prob(&self, g: &G) -> Option<Rational> {
        match &self.kind {
            LawKind::Exact(p) => Some(p.get(g).cloned().unwrap_or_else(Rational::zero)),
            LawKind::Empirical { .. } => None,
        }
    }

    pub fn prob(&self, g: &G) -> f64 {
        match &self.kind {
            LawKind::Exact(p) => p.get(g).map(to_f64).unwrap_or(0.0),
            LawKind::Empirical { counts, total } => counts.get(g).copied().unwrap_or(0) as f64 / *total as f64,
        }
    }

    pub fn count(&self, g: &G) -> Option<u64> {
        match &self.kind {
            LawKind::Exact(_) => None,
            LawKind::Empirical { counts, .. } => Some(counts.get(g).copied().unwrap_or(0)),
        }
    }

    /// Outcomes with positive mass.
    pub fn support(&self) -> Vec<&G> {
        match &self.kind {
            LawKind::Exact(p) => p.iter().filter(|(_, v)| v.is_positive()).map(|(g, _)| g).collect(),
            LawKind::Empirical { counts, .. } => counts.iter().filter(|(_, c)| **c > 0).map(|(g, _)| g).collect(),
        }
    }

    /// Total probability (exactly one for a valid exact law).
    pub fn total_mass(&self) -> f64 {
        match &self.kind {
            LawKind::Exact(p) => to_f64(&p.values().sum()),
            LawKind::Empirical { .. } => 1.0,
        }
    }

    /// `½ Σ |P(g) - Q(g)|`.
    pub fn total_variation(&self, other: &PrefixLaw<G>) -> f64 {
        let keys: BTreeSet<&G> = self.support().into_iter().chain(other.support()).collect();
        0.5 * keys.into_iter().map(|g| (self.prob(g) - other.prob(g)).abs()).sum::<f64>()
    }
}

/// Pass/fail outcome of a diagnostic; `p_min` is the smallest p-value over
/// the individual comparisons (1 or 0 for exact checks).
#[derive(Clone, Debug, PartialEq)]
pub enum Verdict {
    Consistent { p_min: f64 },
    Rejected { p_min: f64, detail: String },
}

impl Verdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Verdict::Consistent { .. })
    }

    pub fn p_min(&self) -> f64 {
        match self {
            Verdict::Consistent { p_min } | Verdict::Rejected { p_min, .. } => *p_min,
        }
    }
}

/// Checks that the law is constant on relabelling orbits.
///
/// Exact laws are compared exactly. Empirical laws get a chi-square test of
/// uniformity within each orbit of at least two outcomes, Bonferroni
/// corrected over the orbits that received samples.
pub fn exchangeability_test<G: Outcome>(law: &PrefixLaw<G>, alpha: f64) -> Result<Verdict> {
    let mut orbits: BTreeMap<G, Vec<G>> = BTreeMap::new();
    for g in G::universe(law.shape)? {
        orbits.entry(g.orbit_key()?).or_default().push(g);
    }
    match &law.kind {
        LawKind::Exact(_) => {
            for (key, members) in &orbits {
                let first = law.exact_prob(&members[0]).expect("exact law");
                if let Some(bad) = members.iter().find(|g| law.exact_prob(g).expect("exact law") != first) {
                    return Ok(Verdict::Rejected {
                        p_min: 0.0,
                        detail: format!("orbit of {key:?}: P({:?}) = {first} but P({bad:?}) differs", members[0]),
                    });
                }
            }
            Ok(Verdict::Consistent { p_min: 1.0 })
        }
        LawKind::Empirical { .. } => {
            let mut tested = Vec::new();
            for (key, members) in &orbits {
                let counts: Vec<u64> = members.iter().map(|g| law.count(g).expect("empirical law")).collect();
                if members.len() < 2 || counts.iter().all(|&c| c == 0) {
                    continue;
                }
                let (stat, p) = uniformity_chi_square(&counts);
                tested.push((p, stat, key));
            }
            let p_min = tested.iter().map(|t| t.0).fold(1.0, f64::min);
            let threshold = alpha / tested.len().max(1) as f64;
            match tested.iter().find(|t| t.0 < threshold) {
                Some((p, stat, key)) => Ok(Verdict::Rejected {
                    p_min,
                    detail: format!("orbit of {key:?}: chi-square {stat:.3}, p = {p:.3e} < {threshold:.3e}"),
                }),
                None => Ok(Verdict::Consistent { p_min }),
            }
        }
    }
}

/// Exact law of `G(k, W)|k` for a step graphon: for each `F ∈ L_k`,
/// `Σ_z Π μ(z_i) Π_{ij ∈ F} w(z_i, z_j) Π_{ij ∉ F} (1 - w(z_i, z_j))`.
pub fn prefix_law_exact(w: &StepGraphon, k: usize) -> Result<PrefixLaw<LabelledGraph>> {
    let outcomes = LabelledGraph::universe(k)?;
    if outcomes.len() as f64 * (w.m() as f64).powi(k as i32) > WORK_CAP {
        return capacity(format!("prefix law of size {k} over {} blocks exceeds the work cap", w.m()));
    }
    let mut probs = BTreeMap::new();
    for f in outcomes {
        let p = induced_block_sum(&f, w);
        probs.insert(f, p);
    }
    PrefixLaw::exact(k, probs)
}

fn induced_block_sum(f: &LabelledGraph, w: &StepGraphon) -> Rational {
    fn go(f: &LabelledGraph, w: &StepGraphon, z: &mut Vec<usize>, acc: Rational) -> Rational {
        let i = z.len();
        if i == f.n() {
            return acc;
        }
        let mut total = Rational::zero();
        for b in 0..w.m() {
            let mut factor = &acc * &w.measures()[b];
            for (j, &zj) in z.iter().enumerate() {
                if factor.is_zero() {
                    break;
                }
                let p = w.entry(zj, b);
                if f.has_edge(j, i) {
                    factor *= p;
                } else {
                    factor *= int(1) - p;
                }
            }
            if factor.is_zero() {
                continue;
            }
            z.push(b);
            total += go(f, w, z, factor);
            z.pop();
        }
        total
    }
    go(f, w, &mut Vec::new(), Rational::one())
}

type PrefixHook = dyn Fn(usize, &mut dyn RngCore) -> LabelledGraph + Send + Sync;

/// Generator of prefixes `H|n` of an exchangeable infinite random graph.
#[derive(Clone)]
pub enum GraphSource {
    /// `G(∞, W)` for a step graphon.
    WRandom(StepGraphon),
    /// `G(∞, W)` for a general kernel.
    General(GeneralGraphon),
    /// `G(∞, W)` with `W` drawn once per infinite graph from a finite mixture.
    Mixture(Vec<(f64, StepGraphon)>),
    /// Caller-supplied sampler returning a graph on exactly `n` vertices.
    External(Arc<PrefixHook>),
}

impl fmt::Debug for GraphSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphSource::WRandom(w) => f.debug_tuple("WRandom").field(w).finish(),
            GraphSource::General(w) => f.debug_tuple("General").field(w).finish(),
            GraphSource::Mixture(m) => f.debug_tuple("Mixture").field(m).finish(),
            GraphSource::External(_) => f.write_str("External(..)"),
        }
    }
}

impl GraphSource {
    /// Mixture with positive weights summing to one (within 1e-9).
    pub fn mixture(components: Vec<(f64, StepGraphon)>) -> Result<Self> {
        if components.is_empty() {
            return input("mixture needs at least one component");
        }
        if components.iter().any(|(p, _)| !(*p > 0.0)) {
            return input("mixture weights must be positive");
        }
        let total: f64 = components.iter().map(|c| c.0).sum();
        if (total - 1.0).abs() > 1e-9 {
            return input(format!("mixture weights sum to {total}, not 1"));
        }
        Ok(GraphSource::Mixture(components))
    }

    pub fn external(hook: impl Fn(usize, &mut dyn RngCore) -> LabelledGraph + Send + Sync + 'static) -> Self {
        GraphSource::External(Arc::new(hook))
    }

    /// Draws `H|n`.
    pub fn sample_prefix(&self, n: usize, rng: &mut StreamRng) -> Result<LabelledGraph> {
        match self {
            GraphSource::WRandom(w) => sample_w_random(w, n, rng),
            GraphSource::General(w) => sample_w_random(w, n, rng),
            GraphSource::Mixture(components) => {
                let u: f64 = rng.gen();
                let mut acc = 0.0;
                let mut chosen = &components[components.len() - 1].1;
                for (p, w) in components {
                    acc += p;
                    if u < acc {
                        chosen = w;
                        break;
                    }
                }
                sample_w_random(chosen, n, rng)
            }
            GraphSource::External(hook) => {
                let g = hook(n, rng);
                if g.n() != n {
                    return Err(Error::Invariant(format!("external source returned {} vertices, asked for {n}", g.n())));
                }
                Ok(g)
            }
        }
    }

    /// Deterministic (non-mixture) W-random source.
    pub fn is_deterministic_kernel(&self) -> bool {
        matches!(self, GraphSource::WRandom(_) | GraphSource::General(_))
    }
}

/// Empirical law of `samples` independent draws of an outcome.
pub fn empirical_law<G, R, D>(shape: G::Shape, samples: u64, rng: &mut R, draw: D) -> Result<PrefixLaw<G>>
where
    G: Outcome,
    R: Rng + ?Sized,
    D: Fn(&mut StreamRng) -> Result<G> + Sync,
{
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let counts = chunked(
        rng,
        samples,
        Ok(BTreeMap::new()),
        |r, len| {
            let mut counts: BTreeMap<G, u64> = BTreeMap::new();
            for _ in 0..len {
                *counts.entry(draw(r)?).or_default() += 1;
            }
            Ok(counts)
        },
        |a: Result<BTreeMap<G, u64>>, b| {
            let mut a = a?;
            for (g, c) in b? {
                *a.entry(g).or_default() += c;
            }
            Ok(a)
        },
    )?;
    PrefixLaw::empirical(shape, counts)
}

/// Empirical law of `H|k` over `samples` independent prefixes.
pub fn prefix_law_empirical<R: Rng + ?Sized>(
    src: &GraphSource,
    k: usize,
    samples: u64,
    rng: &mut R,
) -> Result<PrefixLaw<LabelledGraph>> {
    if k == 0 || k > PREFIX_CAP {
        return capacity(format!("prefix size {k} outside 1..={PREFIX_CAP}"));
    }
    empirical_law(k, samples, rng, |r| src.sample_prefix(k, r))
}

/// Finite pattern on an explicit vertex set; vertices may be isolated.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgePattern<V: Ord + Copy> {
    vertices: BTreeSet<V>,
    edges: Vec<(V, V)>,
}

impl<V: Ord + Copy + fmt::Debug> EdgePattern<V> {
    /// Vertex set is `vertices` plus every edge endpoint.
    pub fn new(vertices: impl IntoIterator<Item = V>, edges: Vec<(V, V)>) -> Self {
        let mut vs: BTreeSet<V> = vertices.into_iter().collect();
        for &(a, b) in &edges {
            vs.insert(a);
            vs.insert(b);
        }
        EdgePattern { vertices: vs, edges }
    }

    pub fn from_edges(edges: Vec<(V, V)>) -> Self {
        Self::new([], edges)
    }

    pub fn vertices(&self) -> &BTreeSet<V> {
        &self.vertices
    }

    pub fn edges(&self) -> &[(V, V)] {
        &self.edges
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.vertices.is_disjoint(&other.vertices)
    }

    pub fn union(&self, other: &Self) -> Self {
        EdgePattern {
            vertices: self.vertices.union(&other.vertices).copied().collect(),
            edges: self.edges.iter().chain(&other.edges).copied().collect(),
        }
    }

    /// All edges present according to `has`.
    pub fn holds(&self, has: impl Fn(V, V) -> bool) -> bool {
        self.edges.iter().all(|&(a, b)| has(a, b))
    }
}

/// Checks every pair is vertex-disjoint.
pub fn check_disjoint<V: Ord + Copy + fmt::Debug>(pairs: &[(EdgePattern<V>, EdgePattern<V>)]) -> Result<()> {
    if pairs.is_empty() {
        return input("at least one pattern pair is required");
    }
    for (a, b) in pairs {
        if !a.is_disjoint(b) {
            return input(format!("patterns {a:?} and {b:?} share vertices"));
        }
    }
    Ok(())
}

/// Per-pair statistics and the Bonferroni verdict of a product-criterion test.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtremalityReport {
    pub verdict: Verdict,
    pub pairs: Vec<ProductTest>,
    pub alpha: f64,
}

/// Product-criterion test on `samples` independent outcomes: for each pair,
/// a delta-method z-test of `P(A ∧ B) = P(A) P(B)`, rejecting when the
/// smallest p-value is below `alpha / pairs`.
pub fn product_criterion<H, R, D, C>(pairs: usize, samples: u64, alpha: f64, rng: &mut R, draw: D, contains: C) -> Result<ExtremalityReport>
where
    R: Rng + ?Sized,
    D: Fn(&mut StreamRng) -> Result<H> + Sync,
    C: Fn(&H, usize) -> (bool, bool) + Sync,
{
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let counts = chunked(
        rng,
        samples,
        Ok(vec![PairCounts::default(); pairs]),
        |r, len| {
            let mut c = vec![PairCounts::default(); pairs];
            for _ in 0..len {
                let h = draw(r)?;
                for (i, pc) in c.iter_mut().enumerate() {
                    let (a, b) = contains(&h, i);
                    pc.record(a, b);
                }
            }
            Ok(c)
        },
        |a: Result<Vec<PairCounts>>, b| Ok(a?.into_iter().zip(b?).map(|(x, y)| x.merge(y)).collect()),
    )?;
    let tests: Vec<ProductTest> = counts.iter().map(product_identity_test).collect();
    let p_min = tests.iter().map(|t| t.p_value).fold(1.0, f64::min);
    let threshold = alpha / pairs as f64;
    let verdict = match tests.iter().enumerate().find(|(_, t)| t.p_value < threshold) {
        Some((i, t)) => Verdict::Rejected {
            p_min,
            detail: format!(
                "pair {}: P(both) = {:.5} vs P(A)P(B) = {:.5}, z = {:.2}",
                i + 1,
                t.p_both,
                t.p_a * t.p_b,
                t.z
            ),
        },
        None => Verdict::Consistent { p_min },
    };
    Ok(ExtremalityReport { verdict, pairs: tests, alpha })
}

/// Tests the product criterion for extreme exchangeable laws on pairs of
/// vertex-disjoint patterns (0-based vertices of the infinite graph). All
/// three probabilities per pair come from the same prefix draws.
pub fn extremality_test<R: Rng + ?Sized>(
    src: &GraphSource,
    pairs: &[(EdgePattern<usize>, EdgePattern<usize>)],
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<ExtremalityReport> {
    check_disjoint(pairs)?;
    for (a, b) in pairs {
        for &(u, v) in a.edges().iter().chain(b.edges()) {
            if u == v {
                return input("simple-graph patterns cannot contain loops");
            }
        }
    }
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

/// Both sides of `E t(F, Γ) = P(H ⊇ F)` for `H = G(∞, W)` and their gap.
#[derive(Clone, Debug, PartialEq)]
pub struct Correspondence {
    pub lhs: Rational,
    pub rhs: Rational,
    pub gap: Rational,
}

/// `lhs = t(F, W)`; `rhs = Σ_{F' ∈ L_k, F' ⊇ F} P(H|k = F')` with `F`
/// placed on the first `v(F)` of `k` vertices.
pub fn correspondence_check(w: &StepGraphon, f: &LabelledGraph, k: usize) -> Result<Correspondence> {
    if f.n() > k {
        return Err(Error::Precondition(format!("pattern on {} vertices does not fit in {k}", f.n())));
    }
    let lhs = exact_density(f, w)?;
    let law = prefix_law_exact(w, k)?;
    let padded = LabelledGraph::from_edges(k, &f.edges())?;
    let rhs = supergraphs(&padded)
        .iter()
        .map(|g| law.exact_prob(g).expect("exact law"))
        .sum::<Rational>();
    let gap = (&lhs - &rhs).abs();
    Ok(Correspondence { lhs, rhs, gap })
}

/// `t_ind(F, H|n)` for each `n` in `n_grid`, all restrictions of a single
/// draw of `H|max(n_grid)`.
pub fn martingale_trace<R: Rng + ?Sized>(
    src: &GraphSource,
    f: &LabelledGraph,
    n_grid: &[usize],
    rng: &mut R,
) -> Result<Vec<f64>> {
    if f.n() > PATTERN_CAP {
        return capacity(format!("pattern has {} vertices, cap is {PATTERN_CAP}", f.n()));
    }
    if n_grid.is_empty() || n_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Precondition("grid must be nonempty and strictly increasing".into()));
    }
    if n_grid[0] < f.n() {
        return Err(Error::Precondition(format!("grid starts below v(F) = {}", f.n())));
    }
    let top = *n_grid.last().expect("nonempty");
    let mut r = stream(rng.gen(), 0);
    let h = src.sample_prefix(top, &mut r)?;
    n_grid
        .iter()
        .map(|&n| Ok(to_f64(&t_ind(f, &h.restrict(n)?)?)))
        .collect()
}
