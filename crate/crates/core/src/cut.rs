//! Cut norm of signed step kernels and a permutation-overlay upper bound on
//! the cut distance between step graphons.

use num_traits::{Signed, Zero};

use crate::error::{capacity, input, Result};
use crate::graphon::{normalise_measures, StepGraphon};
use crate::rational::{to_f64, Rational};

/// Block cap for the exhaustive cut-norm search.
pub const CUT_CAP: usize = 16;
/// Block cap for the permutation search in [`cut_distance_upper`].
pub const OVERLAY_CAP: usize = 8;

/// Signed step kernel `D` on blocks with measures `mu`.
#[derive(Clone, Debug, PartialEq)]
pub struct SignedStepKernel {
    mu: Vec<Rational>,
    d: Vec<Vec<Rational>>,
}

impl SignedStepKernel {
    pub fn new(mu: Vec<Rational>, d: Vec<Vec<Rational>>) -> Result<Self> {
        let mu = normalise_measures(mu)?;
        let m = mu.len();
        if d.len() != m || d.iter().any(|r| r.len() != m) {
            return input(format!("kernel must be {m}x{m}"));
        }
        Ok(SignedStepKernel { mu, d })
    }

    pub fn m(&self) -> usize {
        self.mu.len()
    }

    pub fn measures(&self) -> &[Rational] {
        &self.mu
    }

    pub fn entry(&self, a: usize, b: usize) -> &Rational {
        &self.d[a][b]
    }

    /// `W1 - W2∘π`, block `a` of `W2` replaced by `perm[a]`. Measures must
    /// agree block by block.
    pub fn difference(w1: &StepGraphon, w2: &StepGraphon, perm: &[usize]) -> Result<Self> {
        let m = w1.m();
        if w2.m() != m || perm.len() != m {
            return input("kernels have different block counts");
        }
        if (0..m).any(|a| w1.measures()[a] != w2.measures()[perm[a]]) {
            return input("overlay does not preserve block measures");
        }
        let d = (0..m)
            .map(|a| (0..m).map(|b| w1.entry(a, b) - w2.entry(perm[a], perm[b])).collect())
            .collect();
        Ok(SignedStepKernel { mu: w1.measures().to_vec(), d })
    }
}

/// `max_{S,T ⊆ [m]} |Σ_{a∈S, b∈T} μ_a μ_b D(a, b)|`, exactly.
///
/// Runs over every row set `S` (Gray-code order); for fixed `S` the best `T`
/// takes all columns of one sign, which attains the maximum over `T`.
pub fn cut_norm(k: &SignedStepKernel) -> Result<Rational> {
    let m = k.m();
    if m > CUT_CAP {
        return capacity(format!("cut norm is capped at {CUT_CAP} blocks, got {m}"));
    }
    // weighted[a][b] = μ_a μ_b D(a, b)
    let weighted: Vec<Vec<Rational>> = (0..m)
        .map(|a| (0..m).map(|b| &k.mu[a] * &k.mu[b] * &k.d[a][b]).collect())
        .collect();
    let mut col = vec![Rational::zero(); m];
    let mut in_s = vec![false; m];
    let mut best = Rational::zero();
    for step in 1u32..(1 << m) {
        let a = step.trailing_zeros() as usize;
        in_s[a] = !in_s[a];
        for (c, w) in col.iter_mut().zip(&weighted[a]) {
            if in_s[a] {
                *c += w;
            } else {
                *c -= w;
            }
        }
        let (mut pos, mut neg) = (Rational::zero(), Rational::zero());
        for c in &col {
            if c.is_positive() {
                pos += c;
            } else {
                neg -= c;
            }
        }
        for cand in [pos, neg] {
            if cand > best {
                best = cand;
            }
        }
    }
    Ok(best)
}

fn cut_norm_f64(mu: &[f64], d: &[Vec<f64>]) -> f64 {
    let m = mu.len();
    let mut best: f64 = 0.0;
    for s in 1u32..(1 << m) {
        let mut pos = 0.0;
        let mut neg = 0.0;
        for b in 0..m {
            let c: f64 = (0..m).filter(|a| s >> a & 1 == 1).map(|a| mu[a] * mu[b] * d[a][b]).sum();
            if c > 0.0 {
                pos += c;
            } else {
                neg -= c;
            }
        }
        best = best.max(pos).max(neg);
    }
    best
}

fn permutations(m: usize, admissible: &dyn Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    fn go(m: usize, admissible: &dyn Fn(usize, usize) -> bool, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == m {
            out.push(cur.clone());
            return;
        }
        for v in 0..m {
            if !used[v] && admissible(cur.len(), v) {
                used[v] = true;
                cur.push(v);
                go(m, admissible, cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(m, admissible, &mut Vec::new(), &mut vec![false; m], &mut out);
    out
}

/// `min_π ||W1 - W2∘π||_□` over measure-preserving block permutations π;
/// an upper bound on the cut distance `δ□(W1, W2)`.
pub fn cut_distance_upper(w1: &StepGraphon, w2: &StepGraphon) -> Result<Rational> {
    let m = w1.m();
    if w2.m() != m {
        return input(format!("block counts differ: {m} vs {}", w2.m()));
    }
    if m > OVERLAY_CAP {
        return capacity(format!("cut distance is capped at {OVERLAY_CAP} blocks, got {m}"));
    }
    let mut sorted1 = w1.measures().to_vec();
    let mut sorted2 = w2.measures().to_vec();
    sorted1.sort();
    sorted2.sort();
    if sorted1 != sorted2 {
        return input("block measures differ");
    }
    let perms = permutations(m, &|a, b| w1.measures()[a] == w2.measures()[b]);
    // screen in floating point, then settle near-minimal candidates exactly
    let mu: Vec<f64> = w1.measures().iter().map(to_f64).collect();
    let mut scored: Vec<(f64, &Vec<usize>)> = Vec::with_capacity(perms.len());
    for p in &perms {
        let d: Vec<Vec<f64>> = (0..m)
            .map(|a| (0..m).map(|b| to_f64(w1.entry(a, b)) - to_f64(w2.entry(p[a], p[b]))).collect())
            .collect();
        if d.iter().flatten().all(|x| *x == 0.0) {
            let exact = SignedStepKernel::difference(w1, w2, p)?;
            if exact.d.iter().flatten().all(Zero::is_zero) {
                return Ok(Rational::zero());
            }
        }
        scored.push((cut_norm_f64(&mu, &d), p));
    }
    let floor = scored.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let mut best: Option<Rational> = None;
    for (score, p) in scored {
        if score <= floor + 1e-9 {
            let v = cut_norm(&SignedStepKernel::difference(w1, w2, p)?)?;
            if best.as_ref().is_none_or(|b| v < *b) {
                best = Some(v);
            }
        }
    }
    Ok(best.expect("identity overlay is admissible"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphon::{pushforward, BlockMap};
    use crate::rational::{frac, int};

    #[test]
    fn cut_norm_examples() {
        let half = vec![frac(1, 2), frac(1, 2)];
        let zero = SignedStepKernel::new(half.clone(), vec![vec![int(0); 2]; 2]).unwrap();
        assert_eq!(cut_norm(&zero).unwrap(), int(0));
        let checker = SignedStepKernel::new(half.clone(), vec![vec![int(1), int(-1)], vec![int(-1), int(1)]]).unwrap();
        assert_eq!(cut_norm(&checker).unwrap(), frac(1, 4));
        let c = SignedStepKernel::new(vec![frac(1, 3); 3], vec![vec![frac(-2, 5); 3]; 3]).unwrap();
        assert_eq!(cut_norm(&c).unwrap(), frac(2, 5));
        let big = SignedStepKernel::new(vec![frac(1, 17); 17], vec![vec![int(0); 17]; 17]).unwrap();
        assert!(cut_norm(&big).is_err());
    }

    #[test]
    fn cut_distance_examples() {
        let a = StepGraphon::constant(frac(1, 5)).unwrap();
        let b = StepGraphon::constant(frac(4, 5)).unwrap();
        assert_eq!(cut_distance_upper(&a, &b).unwrap(), frac(3, 5));
        assert_eq!(cut_distance_upper(&a, &a).unwrap(), int(0));
        let w = StepGraphon::from_f64(&[0.25; 4], &[
            vec![0.1, 0.2, 0.3, 0.4],
            vec![0.2, 0.5, 0.6, 0.7],
            vec![0.3, 0.6, 0.8, 0.9],
            vec![0.4, 0.7, 0.9, 1.0],
        ])
        .unwrap();
        let p = pushforward(&w, &BlockMap::permutation(&w, &[2, 0, 3, 1]).unwrap()).unwrap();
        assert_ne!(p, w);
        assert_eq!(cut_distance_upper(&w, &p).unwrap(), int(0));
        let bg = StepGraphon::boys_girls(0.5, 0.2, 0.4, 0.6).unwrap();
        assert!(cut_distance_upper(&w, &bg).is_err());
    }
}
