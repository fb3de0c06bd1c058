//! Homomorphism densities of a pattern `F` in a host `G`.
//!
//! * `t(F, G)`: fraction of all maps `V(F) -> V(G)` that are homomorphisms,
//!   i.e. `P(F ⊆ G[k])`.
//! * `t_inj(F, G)`: the same over injective maps, `P(F ⊆ G[k]')`.
//! * `t_ind(F, G)`: injective maps that are induced embeddings,
//!   `P(F = G[k]')`.
//!
//! Exact values are [`Rational`]; counts come from a backtracking search over
//! the pattern's vertices with bitset candidate sets.

use std::collections::HashMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rand::Rng;

use crate::canon::{GraphEnumeration, UnlabelledGraph};
use crate::error::{capacity, input, Error, Result};
use crate::graph::{BitSet, LabelledGraph};
use crate::rational::{frac, int, Rational};
use crate::rng::chunked;
use crate::stats::hoeffding_halfwidth;

/// Largest pattern the exact counters accept.
pub const PATTERN_CAP: usize = 8;
/// Default significance level for Hoeffding intervals.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Mode {
    Hom,
    Inj,
    Ind,
}

/// Orders pattern vertices so that each one (after the first of its
/// component) has as many already-placed neighbours as possible.
pub(crate) fn search_order(f: &LabelledGraph) -> Vec<usize> {
    let k = f.n();
    let mut placed = vec![false; k];
    let mut order = Vec::with_capacity(k);
    for _ in 0..k {
        let v = (0..k)
            .filter(|&v| !placed[v])
            .max_by_key(|&v| {
                let back = f.neighbours(v).filter(|&u| placed[u]).count();
                (back, f.degree(v), std::cmp::Reverse(v))
            })
            .expect("unplaced vertex");
        placed[v] = true;
        order.push(v);
    }
    order
}

fn check_pattern(f: &LabelledGraph) -> Result<()> {
    if f.n() > PATTERN_CAP {
        return capacity(format!("pattern has {} vertices, cap is {PATTERN_CAP}", f.n()));
    }
    Ok(())
}

struct Counter<'a> {
    host: &'a LabelledGraph,
    mode: Mode,
    order: Vec<usize>,
    // for each position: earlier positions adjacent / non-adjacent in F
    back_adj: Vec<Vec<usize>>,
    back_non: Vec<Vec<usize>>,
    image: Vec<usize>,
    used: BitSet,
}

impl Counter<'_> {
    fn count(&mut self, depth: usize) -> u128 {
        let n = self.host.n();
        let mut cand = BitSet::full(n);
        for &p in &self.back_adj[depth] {
            cand.and_assign(self.host.row(self.image[p]));
        }
        if self.mode != Mode::Hom {
            cand.and_not_assign(self.used.words());
        }
        if self.mode == Mode::Ind {
            for &p in &self.back_non[depth] {
                cand.and_not_assign(self.host.row(self.image[p]));
            }
        }
        if depth + 1 == self.order.len() {
            return cand.count() as u128;
        }
        let mut total = 0u128;
        for v in cand.iter() {
            self.image[depth] = v;
            self.used.insert(v);
            total += self.count(depth + 1);
            self.used.remove(v);
        }
        total
    }
}

fn count_maps(f: &LabelledGraph, g: &LabelledGraph, mode: Mode) -> Result<u128> {
    check_pattern(f)?;
    if mode != Mode::Hom && f.n() > g.n() {
        return Ok(0);
    }
    let order = search_order(f);
    let pos: Vec<usize> = {
        let mut p = vec![0; f.n()];
        for (i, &v) in order.iter().enumerate() {
            p[v] = i;
        }
        p
    };
    let back_adj = order
        .iter()
        .enumerate()
        .map(|(i, &v)| f.neighbours(v).map(|u| pos[u]).filter(|&p| p < i).collect())
        .collect();
    let back_non = order
        .iter()
        .enumerate()
        .map(|(i, &v)| (0..i).filter(|&p| !f.has_edge(order[p], v)).collect())
        .collect();
    let mut c = Counter {
        host: g,
        mode,
        order,
        back_adj,
        back_non,
        image: vec![0; f.n()],
        used: BitSet::empty(g.n()),
    };
    Ok(c.count(0))
}

/// Number of homomorphisms `F -> G`, multiplied out over the components of `F`.
pub fn hom_count(f: &LabelledGraph, g: &LabelledGraph) -> Result<u128> {
    check_pattern(f)?;
    let mut total = 1u128;
    for comp in components(f) {
        let c = if comp.len() == 1 {
            g.n() as u128
        } else {
            count_maps(&f.pattern_unchecked(&comp), g, Mode::Hom)?
        };
        total *= c;
        if total == 0 {
            break;
        }
    }
    Ok(total)
}

pub(crate) fn components(f: &LabelledGraph) -> Vec<Vec<usize>> {
    let mut seen = vec![false; f.n()];
    let mut out = Vec::new();
    for s in 0..f.n() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            for u in f.neighbours(comp[i]) {
                if !seen[u] {
                    seen[u] = true;
                    comp.push(u);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Number of injective homomorphisms `F -> G`.
pub fn inj_count(f: &LabelledGraph, g: &LabelledGraph) -> Result<u128> {
    count_maps(f, g, Mode::Inj)
}

/// Number of injective maps under which `F` is exactly the induced pattern.
pub fn ind_count(f: &LabelledGraph, g: &LabelledGraph) -> Result<u128> {
    count_maps(f, g, Mode::Ind)
}

fn ratio(count: u128, den: BigInt) -> Rational {
    Rational::new(BigInt::from(count), den)
}

pub(crate) fn falling(n: usize, k: usize) -> BigInt {
    (0..k).fold(BigInt::one(), |acc, i| acc * BigInt::from(n - i))
}

/// `t(F, G) = hom(F, G) / v(G)^v(F)`.
pub fn t(f: &LabelledGraph, g: &LabelledGraph) -> Result<Rational> {
    let c = hom_count(f, g)?;
    Ok(ratio(c, num_traits::pow(BigInt::from(g.n()), f.n())))
}

/// `t_inj(F, G)`; zero when `v(F) > v(G)`.
pub fn t_inj(f: &LabelledGraph, g: &LabelledGraph) -> Result<Rational> {
    check_pattern(f)?;
    if f.n() > g.n() {
        return Ok(Rational::zero());
    }
    Ok(ratio(inj_count(f, g)?, falling(g.n(), f.n())))
}

/// `t_ind(F, G)`; zero when `v(F) > v(G)`.
pub fn t_ind(f: &LabelledGraph, g: &LabelledGraph) -> Result<Rational> {
    check_pattern(f)?;
    if f.n() > g.n() {
        return Ok(Rational::zero());
    }
    Ok(ratio(ind_count(f, g)?, falling(g.n(), f.n())))
}

/// Supergraphs of `f` on the same vertex set (including `f`).
pub fn supergraphs(f: &LabelledGraph) -> Vec<LabelledGraph> {
    let missing = f.non_edges();
    if missing.len() >= 32 {
        panic!("too many supergraphs to list");
    }
    (0u32..1 << missing.len())
        .map(|mask| {
            let mut h = f.clone();
            for (b, &(u, v)) in missing.iter().enumerate() {
                if mask >> b & 1 == 1 {
                    h.set_edge(u, v, true);
                }
            }
            h
        })
        .collect()
}

/// A value per labelled graph on a common vertex set.
pub type DensityTable = HashMap<LabelledGraph, Rational>;

fn lookup<'a>(table: &'a DensityTable, g: &LabelledGraph) -> Result<&'a Rational> {
    table
        .get(g)
        .ok_or_else(|| Error::Input(format!("table has no entry for {g:?}")))
}

/// `t_inj(F) = Σ_{F' ⊇ F} t_ind(F')`.
pub fn inj_from_ind(f: &LabelledGraph, ind_table: &DensityTable) -> Result<Rational> {
    supergraphs(f)
        .iter()
        .try_fold(Rational::zero(), |acc, h| Ok(acc + lookup(ind_table, h)?))
}

/// `t_ind(F) = Σ_{F' ⊇ F} (-1)^{e(F') - e(F)} t_inj(F')`.
pub fn ind_from_inj(f: &LabelledGraph, inj_table: &DensityTable) -> Result<Rational> {
    let e = f.edge_count();
    supergraphs(f).iter().try_fold(Rational::zero(), |acc, h| {
        let v = lookup(inj_table, h)?;
        Ok(if (h.edge_count() - e) % 2 == 0 { acc + v } else { acc - v })
    })
}

/// Table of `t_ind(F, G)` (or `t_inj`) for every labelled `F` on `0..k`.
pub fn labelled_table(g: &LabelledGraph, k: usize, induced: bool) -> Result<DensityTable> {
    if k > 5 {
        return capacity(format!("labelled tables are capped at 5 vertices, got {k}"));
    }
    crate::canon::all_labelled(k)
        .into_iter()
        .map(|f| {
            let v = if induced { t_ind(&f, g)? } else { t_inj(&f, g)? };
            Ok((f, v))
        })
        .collect()
}

/// Outcome of comparing `|t - t_inj|` against `v(F)^2 / (2 v(G))`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub gap: Rational,
    pub bound: Rational,
    pub ok: bool,
}

/// Checks `|t(F,G) - t_inj(F,G)| <= v(F)^2 / (2 v(G))` exactly.
pub fn sampling_bound_check(f: &LabelledGraph, g: &LabelledGraph) -> Result<BoundCheck> {
    let gap = (t(f, g)? - t_inj(f, g)?).abs();
    let k = f.n() as i64;
    let bound = frac(k * k, 2 * g.n() as i64);
    let ok = gap <= bound;
    Ok(BoundCheck { gap, bound, ok })
}

/// `t(F1 ⊕ ... ⊕ Fr, G)`, verified against the product of the parts.
pub fn disjoint_union_density(parts: &[&LabelledGraph], g: &LabelledGraph) -> Result<Rational> {
    let Some((first, rest)) = parts.split_first() else {
        return input("disjoint union needs at least one part");
    };
    let union = rest.iter().fold((*first).clone(), |acc, p| acc.disjoint_union(p));
    let direct = t(&union, g)?;
    let product = parts.iter().try_fold(int(1), |acc, p| Ok::<_, Error>(acc * t(p, g)?))?;
    if direct != product {
        return Err(Error::Invariant(format!(
            "t of disjoint union {direct} differs from product of parts {product}"
        )));
    }
    Ok(direct)
}

/// Monte Carlo estimate with a Hoeffding confidence half-width.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DensityEstimate {
    pub point: f64,
    pub samples: u64,
    pub confidence_halfwidth: f64,
}

impl DensityEstimate {
    pub fn from_hits(hits: u64, samples: u64, alpha: f64) -> Self {
        Self::from_sum(hits as f64, samples, alpha)
    }

    pub fn from_sum(sum: f64, samples: u64, alpha: f64) -> Self {
        DensityEstimate {
            point: sum / samples as f64,
            samples,
            confidence_halfwidth: hoeffding_halfwidth(samples, alpha),
        }
    }

    pub fn contains(&self, value: f64) -> bool {
        (self.point - value).abs() <= self.confidence_halfwidth
    }
}

fn mc_check(samples: u64) -> Result<()> {
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    Ok(())
}

/// Monte Carlo `t(F, G)`: fraction of `samples` draws of `G[k]` containing `F`.
pub fn mc_t<R: Rng + ?Sized>(
    f: &LabelledGraph,
    g: &LabelledGraph,
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<DensityEstimate> {
    mc_check(samples)?;
    let k = f.n();
    let hits = chunked(
        rng,
        samples,
        0u64,
        |r, len| {
            let mut verts = vec![0; k];
            let mut hits = 0;
            for _ in 0..len {
                for v in verts.iter_mut() {
                    *v = r.gen_range(0..g.n());
                }
                hits += f.is_subgraph_of(&g.pattern_unchecked(&verts)) as u64;
            }
            hits
        },
        |a, b| a + b,
    );
    Ok(DensityEstimate::from_hits(hits, samples, alpha))
}

/// Monte Carlo `t_inj` and `t_ind` from one stream of `G[k]'` draws. Both
/// are zero when `v(F) > v(G)`.
pub fn mc_t_inj_ind<R: Rng + ?Sized>(
    f: &LabelledGraph,
    g: &LabelledGraph,
    samples: u64,
    alpha: f64,
    rng: &mut R,
) -> Result<(DensityEstimate, DensityEstimate)> {
    mc_check(samples)?;
    if f.n() > g.n() {
        let z = DensityEstimate::from_hits(0, samples, alpha);
        return Ok((z, z));
    }
    let (inj, ind) = chunked(
        rng,
        samples,
        (0u64, 0u64),
        |r, len| {
            let mut acc = (0, 0);
            for _ in 0..len {
                let verts = rand::seq::index::sample(r, g.n(), f.n()).into_vec();
                let p = g.pattern_unchecked(&verts);
                acc.0 += f.is_subgraph_of(&p) as u64;
                acc.1 += (&p == f) as u64;
            }
            acc
        },
        |a, b| (a.0 + b.0, a.1 + b.1),
    );
    Ok((
        DensityEstimate::from_hits(inj, samples, alpha),
        DensityEstimate::from_hits(ind, samples, alpha),
    ))
}

/// Truncated density embedding over a fixed enumeration, optionally carrying
/// the `1 / v(G)` coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityVector {
    enumeration: Arc<GraphEnumeration>,
    values: Vec<f64>,
    inv_size: Option<f64>,
}

impl DensityVector {
    pub fn new(enumeration: Arc<GraphEnumeration>, values: Vec<f64>, inv_size: Option<f64>) -> Result<Self> {
        if values.len() != enumeration.len() {
            return input(format!(
                "{} values for an enumeration of {} graphs",
                values.len(),
                enumeration.len()
            ));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return input("density values must lie in [0, 1]");
        }
        Ok(DensityVector { enumeration, values, inv_size })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn inv_size(&self) -> Option<f64> {
        self.inv_size
    }

    pub fn enumeration(&self) -> &GraphEnumeration {
        &self.enumeration
    }
}

/// `τ(G) = (t(F_i, G))_i` over the enumeration.
pub fn tau_vector(g: &LabelledGraph, enumeration: &Arc<GraphEnumeration>) -> Result<DensityVector> {
    let values = enumeration
        .iter()
        .map(|f| Ok(crate::rational::to_f64(&t(f.graph(), g)?)))
        .collect::<Result<Vec<f64>>>()?;
    DensityVector::new(enumeration.clone(), values, None)
}

/// `τ⁺(G) = (τ(G), 1 / v(G))`.
pub fn tau_plus(g: &LabelledGraph, enumeration: &Arc<GraphEnumeration>) -> Result<DensityVector> {
    let mut v = tau_vector(g, enumeration)?;
    v.inv_size = Some(1.0 / g.n() as f64);
    Ok(v)
}

/// `d(x, y) = Σ_i 2^{-i} |x_{F_i} - y_{F_i}|` with `F_1, F_2, ...` the
/// enumeration order. For `τ⁺` vectors the `1/v` coordinate is term `i = 0`.
pub fn metric_d(x: &DensityVector, y: &DensityVector) -> Result<f64> {
    if !Arc::ptr_eq(&x.enumeration, &y.enumeration) && x.enumeration != y.enumeration {
        return input("density vectors use different enumerations");
    }
    let head = match (x.inv_size, y.inv_size) {
        (Some(a), Some(b)) => (a - b).abs(),
        (None, None) => 0.0,
        _ => return input("cannot compare a τ vector with a τ⁺ vector"),
    };
    let mut weight = 1.0;
    let mut sum = head;
    for (a, b) in x.values.iter().zip(&y.values) {
        weight *= 0.5;
        sum += weight * (a - b).abs();
    }
    Ok(sum)
}

/// Convenience: exact densities of one unlabelled pattern.
pub fn all_three(f: &UnlabelledGraph, g: &LabelledGraph) -> Result<(Rational, Rational, Rational)> {
    Ok((t(f.graph(), g)?, t_inj(f.graph(), g)?, t_ind(f.graph(), g)?))
}
